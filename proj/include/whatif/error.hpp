// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace whatif {

enum class Errc {
  ParseError,
  DuplicateIndex,
  EmptyFrame,
  NonUniformIndex,
  InvalidWindow,
  WindowTooLarge,
  EmptySeries,
  MissingVariable,
  InvalidSpec,
  SingularDesign,
  InsufficientData,
  MissingExogPath,
  InvalidHorizon,
  FitDidNotConverge,
  InvalidSystem,
  CannotFixTarget,
  DivergedTraining,
  InvalidScenario,
  ModelNotFitted,
  ModelNotInRun,
  ShapeError,
  EmptyInput,
  InvalidCoordinate,
  UndefinedBearing,
  AlreadyInPort,
  InvalidBBox,
  InvalidRecord,
  InvalidConfig,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateIndex: return "DuplicateIndex";
    case Errc::EmptyFrame: return "EmptyFrame";
    case Errc::NonUniformIndex: return "NonUniformIndex";
    case Errc::InvalidWindow: return "InvalidWindow";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::MissingVariable: return "MissingVariable";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::SingularDesign: return "SingularDesign";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::MissingExogPath: return "MissingExogPath";
    case Errc::InvalidHorizon: return "InvalidHorizon";
    case Errc::FitDidNotConverge: return "FitDidNotConverge";
    case Errc::InvalidSystem: return "InvalidSystem";
    case Errc::CannotFixTarget: return "CannotFixTarget";
    case Errc::DivergedTraining: return "DivergedTraining";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::ModelNotFitted: return "ModelNotFitted";
    case Errc::ModelNotInRun: return "ModelNotInRun";
    case Errc::ShapeError: return "ShapeError";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidCoordinate: return "InvalidCoordinate";
    case Errc::UndefinedBearing: return "UndefinedBearing";
    case Errc::AlreadyInPort: return "AlreadyInPort";
    case Errc::InvalidBBox: return "InvalidBBox";
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library. `code()` identifies the condition;
/// `row()` is set for errors tied to a 1-based input line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), row_(row), message_(what) {}

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  Errc code_;
  std::optional<std::size_t> row_;
  std::string message_;
};

}  // namespace whatif
