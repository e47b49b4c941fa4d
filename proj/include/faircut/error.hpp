#pragma once

#include <stdexcept>
#include <string>

namespace faircut {

enum class Errc {
    self_loop,
    negative_weight,
    isolated_node,
    bad_shape,
    bad_input,
    empty_cluster,
    wrong_source,
    would_empty_cluster,
    singular_update,
    lp_infeasible,
    ip2_infeasible,
    disconnected_after_retries,
    all_cells_failed,
};

class Error : public std::runtime_error {
  public:
    Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace faircut
