#include "searn/error.hpp"

namespace searn {

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::state: return "state error";
    case ErrorKind::data: return "data error";
    case ErrorKind::config: return "config error";
    case ErrorKind::task_contract: return "task contract violation";
    case ErrorKind::training: return "training failure";
    case ErrorKind::optimizer: return "optimizer error";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::internal: return "internal error";
  }
  return "error";
}

}  // namespace searn
