#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <span>
#include <string>

namespace spots {

/// A natural number extended with infinity. All arithmetic saturates at
/// infinity and never wraps. `inf < inf` is false, as for every other
/// comparison of equal values.
class PnValue {
public:
    using rep = std::uint64_t;

    constexpr PnValue() = default;
    constexpr PnValue(rep v) : v_(v >= kInfRep ? kInfRep : v) {}  // NOLINT(google-explicit-constructor)

    static constexpr PnValue inf() { return PnValue(kInfRep); }
    static constexpr PnValue zero() { return PnValue(0); }

    constexpr bool is_inf() const { return v_ == kInfRep; }
    constexpr rep value() const { return v_; }

    friend constexpr bool operator==(PnValue a, PnValue b) = default;
    friend constexpr auto operator<=>(PnValue a, PnValue b) { return a.v_ <=> b.v_; }

    friend constexpr PnValue operator+(PnValue a, PnValue b) {
        if (a.is_inf() || b.is_inf()) return inf();
        const rep s = a.v_ + b.v_;
        return (s < a.v_ || s >= kInfRep) ? inf() : PnValue(s);
    }

    // Truncated subtraction: inf - x = inf, and finite results floor at 0.
    friend constexpr PnValue operator-(PnValue a, PnValue b) {
        if (a.is_inf()) return inf();
        if (b.is_inf() || b.v_ >= a.v_) return zero();
        return PnValue(a.v_ - b.v_);
    }

    PnValue& operator+=(PnValue o) { return *this = *this + o; }

    std::string to_string() const { return is_inf() ? "inf" : std::to_string(v_); }

private:
    static constexpr rep kInfRep = std::numeric_limits<rep>::max();
    rep v_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, PnValue v) { return os << v.to_string(); }

inline constexpr PnValue kInf = PnValue::inf();

/// Saturating sum; any infinite term makes the sum infinite, the empty sum is 0.
inline PnValue pn_sum(std::span<const PnValue> values) {
    PnValue s = 0;
    for (PnValue v : values) s += v;
    return s;
}
inline PnValue pn_sum(std::initializer_list<PnValue> values) {
    return pn_sum(std::span<const PnValue>(values.begin(), values.size()));
}

/// Proof and disproof number of a search node.
struct ProofNumbers {
    PnValue pn = 1;
    PnValue dn = 1;

    static constexpr ProofNumbers leaf() { return {1, 1}; }
    static constexpr ProofNumbers proved() { return {0, kInf}; }
    static constexpr ProofNumbers disproved() { return {kInf, 0}; }

    constexpr bool is_proved() const { return pn == PnValue(0) && dn.is_inf(); }
    constexpr bool is_disproved() const { return pn.is_inf() && dn == PnValue(0); }
    constexpr bool is_solved() const { return is_proved() || is_disproved(); }

    friend constexpr bool operator==(const ProofNumbers&, const ProofNumbers&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ProofNumbers& p) {
    return os << '(' << p.pn << ", " << p.dn << ')';
}

enum class Outcome { kWin, kLoss };

inline const char* to_string(Outcome o) { return o == Outcome::kWin ? "win" : "loss"; }

}  // namespace spots
