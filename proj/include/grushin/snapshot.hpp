#pragma once

#include <iosfwd>
#include <string>

#include "grushin/spectral.hpp"

namespace grushin::spectral {

/// GRSF1 field snapshot: the magic bytes "GRSF1", a little-endian u32 header
/// length, a JSON header {eta_step, eta_count, m_max, x_range, x_count} and the
/// coefficients as (float32 re, float32 im) pairs in m-major, q-minor order.
void write_snapshot(std::ostream& out, const SpectralField& f);
void write_snapshot(const std::string& path, const SpectralField& f);

/// Reads a snapshot, creating a grid from the stored header. Throws
/// std::runtime_error on a malformed or truncated stream.
SpectralField read_snapshot(std::istream& in);
SpectralField read_snapshot(const std::string& path);

}  // namespace grushin::spectral
