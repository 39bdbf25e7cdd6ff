#pragma once

#include <cstdint>

namespace gfl {

/// Counts of length-p vector operations performed by the update formulas.
struct OpCounters {
    std::uint64_t mults = 0;  ///< scalar * vector
    std::uint64_t adds = 0;   ///< vector +/- vector
    std::uint64_t norms = 0;  ///< Euclidean norm of a vector
    std::uint64_t comps = 0;  ///< scalar comparisons

    OpCounters& operator+=(const OpCounters& o) {
        mults += o.mults;
        adds += o.adds;
        norms += o.norms;
        comps += o.comps;
        return *this;
    }
    friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

/// Helper for optional counting: a null pointer means "don't count".
inline void count(OpCounters* ops, std::uint64_t mults, std::uint64_t adds, std::uint64_t norms = 0,
                  std::uint64_t comps = 0) {
    if (!ops) return;
    ops->mults += mults;
    ops->adds += adds;
    ops->norms += norms;
    ops->comps += comps;
}

}  // namespace gfl
