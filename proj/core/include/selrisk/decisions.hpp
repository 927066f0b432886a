#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

namespace selrisk {

/// Directional decision: declared sign of a parameter, or nil when the
/// sign is left undetermined.
enum class Sign : std::uint8_t {
    negative,
    nil,
    positive,
};

/// Length-m vector of per-task decisions.  The decision space is
/// homogeneous across tasks within one vector; four spaces are supported:
///   binary        reject/accept flags
///   signs         {-, nil, +} directional declarations
///   bounds        nonnegative integer confidence bounds
///   group_flags   per-group binary rejection vectors (ragged)
class DecisionVector {
public:
    using Binary = std::vector<std::uint8_t>;
    using Signs = std::vector<Sign>;
    using Bounds = std::vector<int>;
    using GroupFlags = std::vector<std::vector<std::uint8_t>>;

    static DecisionVector binary(Binary d) { return DecisionVector(std::move(d)); }
    static DecisionVector signs(Signs d) { return DecisionVector(std::move(d)); }
    static DecisionVector bounds(Bounds d) { return DecisionVector(std::move(d)); }
    static DecisionVector group_flags(GroupFlags d) { return DecisionVector(std::move(d)); }

    std::size_t size() const {
        return std::visit([](const auto& v) { return v.size(); }, values_);
    }

    bool is_binary() const { return std::holds_alternative<Binary>(values_); }
    bool is_signs() const { return std::holds_alternative<Signs>(values_); }
    bool is_bounds() const { return std::holds_alternative<Bounds>(values_); }
    bool is_group_flags() const { return std::holds_alternative<GroupFlags>(values_); }

    const Binary& as_binary() const { return get<Binary>("binary"); }
    const Signs& as_signs() const { return get<Signs>("signs"); }
    const Bounds& as_bounds() const { return get<Bounds>("bounds"); }
    const GroupFlags& as_group_flags() const { return get<GroupFlags>("group_flags"); }

    friend bool operator==(const DecisionVector& a, const DecisionVector& b) {
        return a.values_ == b.values_;
    }

private:
    template <typename T>
    explicit DecisionVector(T v) : values_(std::move(v)) {}

    template <typename T>
    const T& get(const char* name) const {
        if (const T* v = std::get_if<T>(&values_)) return *v;
        throw std::logic_error(std::string("DecisionVector: not a ") + name + " vector");
    }

    std::variant<Binary, Signs, Bounds, GroupFlags> values_;
};

}  // namespace selrisk
