#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace faircut {

// Node-to-group map with per-group counts and population proportions.
// Immutable after construction; every group must be nonempty.
class GroupAssignment {
  public:
    static GroupAssignment build(std::vector<int> phi, std::optional<int> num_groups = {}) {
        if (phi.empty()) fail(Errc::bad_input, "empty group assignment");
        int m = num_groups.value_or(0);
        for (int c : phi) {
            if (c < 0) fail(Errc::bad_input, "negative group id");
            m = std::max(m, c + 1);
        }
        if (num_groups && m > *num_groups) fail(Errc::bad_input, "group id beyond declared group count");

        GroupAssignment ga;
        ga.phi_ = std::move(phi);
        ga.counts_.assign(m, 0);
        for (int c : ga.phi_) ga.counts_[c]++;
        for (int c = 0; c < m; ++c)
            if (ga.counts_[c] == 0) fail(Errc::bad_input, "empty group " + std::to_string(c));
        ga.proportions_.resize(m);
        for (int c = 0; c < m; ++c)
            ga.proportions_[c] = static_cast<double>(ga.counts_[c]) / static_cast<double>(ga.phi_.size());
        return ga;
    }

    int num_groups() const { return static_cast<int>(counts_.size()); }
    int num_nodes() const { return static_cast<int>(phi_.size()); }
    int group_of(int i) const { return phi_[i]; }
    std::int64_t count(int c) const { return counts_[c]; }
    double proportion(int c) const { return proportions_[c]; }
    std::span<const int> phi() const { return phi_; }

  private:
    std::vector<int> phi_;
    std::vector<std::int64_t> counts_;
    std::vector<double> proportions_;
};

}  // namespace faircut
