#include "selrisk/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selrisk {

PValueVector::PValueVector(std::vector<double> p) : p_(std::move(p)) {
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (!(p_[i] >= 0.0 && p_[i] <= 1.0)) {
            throw std::invalid_argument("PValueVector: entry " + std::to_string(i) +
                                        " outside [0, 1]");
        }
    }
}

ZScoreVector::ZScoreVector(std::vector<double> x) : x_(std::move(x)) {
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i])) {
            throw std::invalid_argument("ZScoreVector: entry " + std::to_string(i) +
                                        " is not finite");
        }
    }
}

namespace {

std::size_t popcount(const std::vector<std::uint8_t>& bits) {
    std::size_t n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
}

}  // namespace

SelectionMask SelectionMask::full(std::size_t m) {
    return SelectionMask(std::vector<std::uint8_t>(m, 1), m);
}

SelectionMask SelectionMask::none(std::size_t m) {
    return SelectionMask(std::vector<std::uint8_t>(m, 0), 0);
}

SelectionMask SelectionMask::from_bits(std::vector<std::uint8_t> bits) {
    for (auto& b : bits) b = (b != 0);
    const std::size_t n = popcount(bits);
    return SelectionMask(std::move(bits), n);
}

SelectionMask SelectionMask::from_indices(std::size_t m, const std::vector<std::size_t>& indices) {
    std::vector<std::uint8_t> bits(m, 0);
    for (auto i : indices) {
        if (i >= m) {
            throw std::invalid_argument("SelectionMask: index out of range");
        }
        bits[i] = 1;
    }
    return SelectionMask(std::move(bits), popcount(bits));
}

SelectionMask SelectionMask::where(std::size_t m, const std::function<bool(std::size_t)>& pred) {
    std::vector<std::uint8_t> bits(m, 0);
    for (std::size_t i = 0; i < m; ++i) bits[i] = pred(i) ? 1 : 0;
    return SelectionMask(std::move(bits), popcount(bits));
}

bool SelectionMask::is_subset_of(const SelectionMask& other) const {
    if (bits_.size() != other.bits_.size()) return false;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] && !other.bits_[i]) return false;
    }
    return true;
}

std::vector<std::size_t> SelectionMask::indices() const {
    std::vector<std::size_t> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) out.push_back(i);
    }
    return out;
}

SelectionMask SelectionMask::intersect(const SelectionMask& other) const {
    if (bits_.size() != other.bits_.size()) {
        throw std::invalid_argument("SelectionMask: size mismatch in intersect");
    }
    std::vector<std::uint8_t> bits(bits_.size(), 0);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        bits[i] = (bits_[i] && other.bits_[i]) ? 1 : 0;
    }
    const std::size_t n = popcount(bits);
    return SelectionMask(std::move(bits), n);
}

double harmonic_adjustment(TaskCount m) {
    // Small terms first keeps the accumulation error at ulp scale.
    double h = 0.0;
    for (std::size_t i = m.value(); i >= 1; --i) {
        h += 1.0 / static_cast<double>(i);
    }
    return static_cast<double>(m.value()) * h;
}

double adjustment_value(AdjustmentRule rule, TaskCount m) {
    switch (rule) {
        case AdjustmentRule::independent:
            return static_cast<double>(m.value());
        case AdjustmentRule::harmonic:
            return harmonic_adjustment(m);
    }
    throw std::logic_error("adjustment_value: unknown rule");
}

}  // namespace selrisk
