#include "asmlens/error.hpp"

namespace asmlens {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NotAnExecutable: return "NotAnExecutable";
    case ErrorKind::NoDebugInfo: return "NoDebugInfo";
    case ErrorKind::UnreadableFile: return "UnreadableFile";
    case ErrorKind::UnknownFile: return "UnknownFile";
    case ErrorKind::UnknownAddress: return "UnknownAddress";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::UnknownBlock: return "UnknownBlock";
    case ErrorKind::UnknownView: return "UnknownView";
    case ErrorKind::UnknownSession: return "UnknownSession";
    case ErrorKind::UnknownBinary: return "UnknownBinary";
    case ErrorKind::NoFurtherHighlight: return "NoFurtherHighlight";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::BadRequest: return "BadRequest";
    case ErrorKind::MalformedDebugInfo: return "MalformedDebugInfo";
    }
    return "Unknown";
}

}  // namespace asmlens
