#pragma once

#include <vector>

#include "cspin/spectra.hpp"

namespace cspin::detail {

/// Sort permutation: |lambda| descending, ties by frequency descending.
std::vector<Index> sorted_order(const std::vector<Complex>& w);

/// Sorts, gauges and biorthonormalizes raw eigenpairs. `lefts` holds
/// coefficient columns (Tr[L rho] = w^T vec rho), paired column-wise with `rights`.
ChannelSpectrum assemble_spectrum(Index dim, int power, const std::vector<Complex>& raw_values,
                                  Matrix rights, Matrix lefts, const DecomposeOptions& options);

}  // namespace cspin::detail
