#include "cvlab/cvgrid.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "cvlab/error.hpp"

namespace cvlab {

namespace {

void put_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

double get_f64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw Error("CVGRID: truncated payload");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_cvgrid(std::ostream& out, const SampledField& field) {
  const auto& g = field.grid();
  std::ostringstream header;
  header << std::setprecision(17) << "CVGRID 1 " << g.rows << ' ' << g.cols << ' ' << g.extent.x << ' ' << g.extent.y
         << ' ' << g.origin.x << ' ' << g.origin.y << ' ' << (field.is_real() ? "real" : "complex") << '\n';
  out << header.str();
  for (const auto& z : field.values()) {
    put_f64(out, z.real());
    if (!field.is_real()) put_f64(out, z.imag());
  }
  if (!out) throw Error("CVGRID: write failed");
}

SampledField read_cvgrid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("CVGRID: missing header");
  std::istringstream hs(line);
  std::string magic, kind;
  int version = 0;
  GridSpec g;
  hs >> magic >> version >> g.rows >> g.cols >> g.extent.x >> g.extent.y >> g.origin.x >> g.origin.y >> kind;
  if (!hs || magic != "CVGRID" || version != 1) throw Error("CVGRID: malformed header: " + line);
  if (kind != "real" && kind != "complex") throw Error("CVGRID: unknown value kind '" + kind + "'");
  const bool real = kind == "real";
  std::vector<cplx> v(g.rows * g.cols);
  for (auto& z : v) {
    const double re = get_f64(in);
    const double im = real ? 0.0 : get_f64(in);
    z = cplx(re, im);
  }
  return SampledField(g, std::move(v), real);
}

void write_cvgrid(const std::filesystem::path& path, const SampledField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("CVGRID: cannot open " + path.string());
  write_cvgrid(out, field);
}

SampledField read_cvgrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("CVGRID: cannot open " + path.string());
  return read_cvgrid(in);
}

}  // namespace cvlab
