#include "grushin/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace grushin::spectral {

namespace {

constexpr std::array<char, 5> magic = {'G', 'R', 'S', 'F', '1'};

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("snapshot: truncated stream");
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const SpectralField& f) {
  const auto& s = f.grid()->spec();
  nlohmann::ordered_json h;
  h["eta_step"] = s.eta_step;
  h["eta_count"] = s.eta_count;
  h["m_max"] = s.m_max;
  h["x_range"] = s.x_range;
  h["x_count"] = s.x_count;
  const std::string header = h.dump();
  out.write(magic.data(), magic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const cplx& c : f.data()) {
    put<float>(out, static_cast<float>(c.real()));
    put<float>(out, static_cast<float>(c.imag()));
  }
  if (!out) throw std::runtime_error("snapshot: write failed");
}

void write_snapshot(const std::string& path, const SpectralField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path);
  write_snapshot(out, f);
}

SpectralField read_snapshot(std::istream& in) {
  std::array<char, 5> m{};
  in.read(m.data(), m.size());
  if (!in || m != magic) throw std::runtime_error("snapshot: bad magic");
  const auto len = get<std::uint32_t>(in);
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw std::runtime_error("snapshot: truncated header");
  GridSpec s;
  try {
    const auto h = nlohmann::json::parse(header);
    s.eta_step = h.at("eta_step").get<double>();
    s.eta_count = h.at("eta_count").get<int>();
    s.m_max = h.at("m_max").get<int>();
    s.x_range = h.at("x_range").get<double>();
    s.x_count = h.at("x_count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("snapshot: bad header: ") + e.what());
  }
  SpectralField f(Grid::create(s));
  for (cplx& c : f.data()) {
    const float re = get<float>(in);
    const float im = get<float>(in);
    c = cplx(re, im);
  }
  return f;
}

SpectralField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  return read_snapshot(in);
}

}  // namespace grushin::spectral
