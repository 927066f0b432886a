#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace selrisk {

/// Number of statistical tasks. Must be at least 1.
class TaskCount {
public:
    explicit TaskCount(std::size_t m) : m_(m) {
        if (m == 0) {
            throw std::invalid_argument("TaskCount: m must be >= 1");
        }
    }

    std::size_t value() const { return m_; }

    friend bool operator==(TaskCount a, TaskCount b) { return a.m_ == b.m_; }

private:
    std::size_t m_;
};

/// Nominal risk level q in [0, 1].
class RiskLevel {
public:
    explicit RiskLevel(double q) : q_(q) {
        if (!(q >= 0.0 && q <= 1.0)) {
            throw std::invalid_argument("RiskLevel: q must lie in [0, 1]");
        }
    }

    double value() const { return q_; }

private:
    double q_;
};

/// Per-task p-values; every entry validated to lie in [0, 1].
class PValueVector {
public:
    explicit PValueVector(std::vector<double> p);

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& values() const { return p_; }

private:
    std::vector<double> p_;
};

/// Per-task z-scale test statistics; entries validated to be finite.
class ZScoreVector {
public:
    explicit ZScoreVector(std::vector<double> x);

    std::size_t size() const { return x_.size(); }
    double operator[](std::size_t i) const { return x_[i]; }
    const std::vector<double>& values() const { return x_; }

private:
    std::vector<double> x_;
};

/// Immutable set of selected tasks over a fixed task range [0, m).
///
/// Masks are value objects: every procedure step produces a new mask, so
/// iteration traces can be recorded and compared without copies going stale.
/// The cached cardinality is established at construction and never changes.
class SelectionMask {
public:
    static SelectionMask full(std::size_t m);
    static SelectionMask none(std::size_t m);
    static SelectionMask from_bits(std::vector<std::uint8_t> bits);
    static SelectionMask from_indices(std::size_t m, const std::vector<std::size_t>& indices);

    /// Build a mask by evaluating `pred(i)` for every task index.
    static SelectionMask where(std::size_t m, const std::function<bool(std::size_t)>& pred);

    std::size_t size() const { return bits_.size(); }   // m
    std::size_t count() const { return count_; }        // |S|
    bool empty() const { return count_ == 0; }
    bool contains(std::size_t i) const { return bits_[i] != 0; }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }

    /// Component-wise S <= other (never selects a task the other deselects).
    bool is_subset_of(const SelectionMask& other) const;

    /// Indices of selected tasks in increasing order.
    std::vector<std::size_t> indices() const;

    SelectionMask intersect(const SelectionMask& other) const;

    friend bool operator==(const SelectionMask& a, const SelectionMask& b) {
        return a.bits_ == b.bits_;
    }

private:
    SelectionMask(std::vector<std::uint8_t> bits, std::size_t count)
        : bits_(std::move(bits)), count_(count) {}

    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

/// Level-adjustment rule f(m) used when scaling a nominal level to
/// q * |S| / f(m).  Independent: f(m) = m.  Harmonic: f(m) = m * H_m,
/// valid under arbitrary dependence between the per-task data.
enum class AdjustmentRule {
    independent,
    harmonic,
};

/// m * sum_{i=1..m} 1/i, summed from the smallest term up.
double harmonic_adjustment(TaskCount m);

/// f(m) for the given rule.
double adjustment_value(AdjustmentRule rule, TaskCount m);

}  // namespace selrisk
