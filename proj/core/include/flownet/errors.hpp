#ifndef FLOWNET_ERRORS_HPP
#define FLOWNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flownet {

enum class Errc {
  // network validation
  CycleDetected,
  MultipleSources,
  MultipleIncoming,
  DisconnectedNode,
  NonPositiveVelocity,
  NegativeDamping,
  IndexingConvention,
  // topology queries
  NoSuchPath,
  // time functions / transit
  OutOfHorizon,
  NotConverged,
  // demand
  WrongThetaVariant,
  BadParameter,
  // pde
  NegativeDampingFactor,
  // control
  AllNegative,
  // harness
  ParseError,
  SchemaError,
  EmptyWindow,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

  // true for scenario/network problems (CLI exit code 2), false for
  // numerical failures (CLI exit code 3)
  bool is_validation() const {
    switch (code_) {
      case Errc::CycleDetected:
      case Errc::MultipleSources:
      case Errc::MultipleIncoming:
      case Errc::DisconnectedNode:
      case Errc::NonPositiveVelocity:
      case Errc::NegativeDamping:
      case Errc::IndexingConvention:
      case Errc::BadParameter:
      case Errc::ParseError:
      case Errc::SchemaError:
        return true;
      default:
        return false;
    }
  }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace flownet

#endif
