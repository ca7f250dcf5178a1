#include "dpinn/jets.hpp"

#include <algorithm>

namespace dpinn {

namespace {
double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}
}  // namespace

JetShape::JetShape(std::vector<int> max_x) : max_x_(std::move(max_x)) {
    if (max_x_.empty() || max_x_.front() < 0) {
        throw std::invalid_argument("jet shape needs at least the (0,0) coefficient");
    }
    if (!std::is_sorted(max_x_.rbegin(), max_x_.rend())) {
        throw std::invalid_argument("jet shape must be downward closed");
    }
    for (int i = 0; i < static_cast<int>(max_x_.size()); ++i) {
        if (max_x_[static_cast<std::size_t>(i)] < 0) {
            throw std::invalid_argument("jet shape row is empty");
        }
        offsets_.push_back(static_cast<int>(indices_.size()));
        for (int j = 0; j <= max_x_[static_cast<std::size_t>(i)]; ++j) {
            indices_.push_back({i, j});
            factorials_.push_back(factorial(i) * factorial(j));
        }
    }
    products_.resize(indices_.size());
    for (int k = 0; k < size(); ++k) {
        const MultiIndex m = indices_[static_cast<std::size_t>(k)];
        for (int p = 0; p < size(); ++p) {
            const MultiIndex a = indices_[static_cast<std::size_t>(p)];
            if (a.t > m.t || a.x > m.x) {
                continue;
            }
            const int q = index(m.t - a.t, m.x - a.x);
            products_[static_cast<std::size_t>(k)].emplace_back(p, q);
        }
    }
}

std::shared_ptr<const JetShape> JetShape::rectangle(int t_degree, int x_degree) {
    if (t_degree < 0 || x_degree < 0) {
        throw std::invalid_argument("negative jet degree");
    }
    return std::make_shared<const JetShape>(std::vector<int>(static_cast<std::size_t>(t_degree + 1), x_degree));
}

std::shared_ptr<const JetShape> JetShape::staircase(std::vector<int> max_x) {
    return std::make_shared<const JetShape>(std::move(max_x));
}

bool JetShape::is_rectangle() const noexcept {
    return std::all_of(max_x_.begin(), max_x_.end(), [&](int v) { return v == max_x_.front(); });
}

int JetShape::index(int i, int j) const noexcept {
    if (i < 0 || j < 0 || i >= static_cast<int>(max_x_.size()) || j > max_x_[static_cast<std::size_t>(i)]) {
        return -1;
    }
    return offsets_[static_cast<std::size_t>(i)] + j;
}

}  // namespace dpinn
