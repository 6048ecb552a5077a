// Copyright 2026 The Fundus Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fundus {

/// Failure categories raised by the library. Each operation documents which
/// of these it can throw.
enum class Errc {
  // imaging
  NoMaskFound,
  InvalidImage,
  // dataset
  SchemaError,
  DuplicateParticipant,
  UnparseableValue,
  EmptyReadings,
  BadRatios,
  NotEnoughMajority,
  EmptyClass,
  // quality gate
  BadThreshold,
  DegenerateTable,
  MissingScore,
  // fusion
  MismatchedPair,
  DuplicatePrediction,
  // metrics / bootstrap
  LengthMismatch,
  Empty,
  ZeroVariance,
  OneClassOnly,
  NoPositives,
  UndefinedPrecision,
  TooManyDegenerateResamples,
  EmptySubgroup,
  // plumbing
  BadConfig,
  BadFormat,
  DanglingReference,
  Io,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NoMaskFound: return "NoMaskFound";
    case Errc::InvalidImage: return "InvalidImage";
    case Errc::SchemaError: return "SchemaError";
    case Errc::DuplicateParticipant: return "DuplicateParticipant";
    case Errc::UnparseableValue: return "UnparseableValue";
    case Errc::EmptyReadings: return "EmptyReadings";
    case Errc::BadRatios: return "BadRatios";
    case Errc::NotEnoughMajority: return "NotEnoughMajority";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::BadThreshold: return "BadThreshold";
    case Errc::DegenerateTable: return "DegenerateTable";
    case Errc::MissingScore: return "MissingScore";
    case Errc::MismatchedPair: return "MismatchedPair";
    case Errc::DuplicatePrediction: return "DuplicatePrediction";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::Empty: return "Empty";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::OneClassOnly: return "OneClassOnly";
    case Errc::NoPositives: return "NoPositives";
    case Errc::UndefinedPrecision: return "UndefinedPrecision";
    case Errc::TooManyDegenerateResamples: return "TooManyDegenerateResamples";
    case Errc::EmptySubgroup: return "EmptySubgroup";
    case Errc::BadConfig: return "BadConfig";
    case Errc::BadFormat: return "BadFormat";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fundus
