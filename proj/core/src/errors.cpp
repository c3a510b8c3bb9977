#include "flownet/errors.hpp"

namespace flownet {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::MultipleSources: return "MultipleSources";
    case Errc::MultipleIncoming: return "MultipleIncoming";
    case Errc::DisconnectedNode: return "DisconnectedNode";
    case Errc::NonPositiveVelocity: return "NonPositiveVelocity";
    case Errc::NegativeDamping: return "NegativeDamping";
    case Errc::IndexingConvention: return "IndexingConvention";
    case Errc::NoSuchPath: return "NoSuchPath";
    case Errc::OutOfHorizon: return "OutOfHorizon";
    case Errc::NotConverged: return "NotConverged";
    case Errc::WrongThetaVariant: return "WrongThetaVariant";
    case Errc::BadParameter: return "BadParameter";
    case Errc::NegativeDampingFactor: return "NegativeDampingFactor";
    case Errc::AllNegative: return "AllNegative";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace flownet
