#include "stoic/error.hpp"

namespace stoic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::BadSymbol: return "BadSymbol";
    case ErrorCode::DuplicateSequence: return "DuplicateSequence";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::BadPercent: return "BadPercent";
    case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::BadChainCount: return "BadChainCount";
    case ErrorCode::Network: return "Network";
    case ErrorCode::HttpStatus: return "HttpStatus";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::BadFasta: return "BadFasta";
    case ErrorCode::InsufficientUnique: return "InsufficientUnique";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stoic
