#pragma once

#include <span>
#include <vector>

#include "imsim/common.hpp"

namespace imsim {

// G x N block interleaver (G = len/N): the element at subblock position
// g*N + n moves to n*G + g, spreading each subblock's entries G subcarriers
// apart. deinterleave is the exact inverse.
std::vector<cplx> interleave(std::span<const cplx> x, int subblock_len);
std::vector<cplx> deinterleave(std::span<const cplx> x, int subblock_len);

// In-place unitary FFT, power-of-two sizes.
void fft_pow2(std::vector<cplx>& a, bool inverse);

std::vector<cplx> dft_unitary(std::span<const cplx> x, bool inverse);

// IDFT + cyclic prefix. The inverse transform is scaled by 1/sqrt(sigma_x2)
// so a frequency block with per-subcarrier average energy sigma_x2 comes out
// with E{||time samples||^2} = N_F.
std::vector<cplx> ofdm_modulate(std::span<const cplx> freq, int cp_len,
                                double sigma_x2);

// CP strip + DFT + sqrt(sigma_x2); exact inverse of ofdm_modulate.
std::vector<cplx> ofdm_demodulate(std::span<const cplx> time, int cp_len,
                                  double sigma_x2);

}  // namespace imsim
