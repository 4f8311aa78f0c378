#pragma once

#include <span>

#include "pvmark/hash.hpp"

namespace pvmark::detail {

bool simd_supported();

// out[i] = h + x_i + E_h(x_i)
void simd_mimc_absorb_batch(const FieldElement& h,
                            std::span<const FieldElement> xs,
                            std::span<FieldElement> out,
                            const MimcParams& params);

// out[i] = hs[i] + x_i + E_{hs[i]}(x_i)
void simd_mimc_absorb_lanes(std::span<const FieldElement> hs,
                            std::span<const FieldElement> xs,
                            std::span<FieldElement> out,
                            const MimcParams& params);

// out[i] = Poseidon_t(rows[i*(t-1) .. (i+1)*(t-1)))
void simd_poseidon_lanes(std::span<const FieldElement> rows,
                         std::span<FieldElement> out,
                         const PoseidonParams& params);

// out[i] = Poseidon_t(prefix || last[i]) with t = |prefix| + 2.
void simd_poseidon_batch(std::span<const FieldElement> prefix,
                         std::span<const FieldElement> last,
                         std::span<FieldElement> out,
                         const PoseidonParams& params);

}  // namespace pvmark::detail
