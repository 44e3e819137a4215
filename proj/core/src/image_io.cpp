#include "csd/image_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "csd/errors.hpp"

namespace csd {

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw NumericalError("cannot format number");
  return std::string(buf, end);
}

double parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DomainError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

double pgm_scale(const ScanImage& image) {
  const double peak =
      image.values.empty() ? 0.0 : *std::max_element(image.values.begin(), image.values.end());
  if (!(peak > 0.0)) return 1.0;
  if (image.sampled && peak <= kPgmMaxval) return 1.0;
  return kPgmMaxval / peak;
}

void write_pgm(std::ostream& out, const ScanImage& image) {
  const double scale = pgm_scale(image);
  out << "P2\n";
  out << "# origin_nm " << format_number(image.origin.x) << ' ' << format_number(image.origin.y)
      << '\n';
  out << "# pitch_nm " << format_number(image.pitch) << '\n';
  out << "# scale " << format_number(scale) << '\n';
  out << image.width << ' ' << image.height << '\n' << kPgmMaxval << '\n';
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      // nearbyint follows the default round-half-to-even mode.
      const double stored = std::clamp(std::nearbyint(image.at(row, col) * scale), 0.0,
                                        static_cast<double>(kPgmMaxval));
      if (col) out << ' ';
      out << static_cast<long>(stored);
    }
    out << '\n';
  }
  if (!out) throw std::ios_base::failure("failed writing PGM");
}

ScanImage read_pgm(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "P2") throw DomainError("not an ASCII PGM (P2)");

  ScanImage image;
  double scale = 1.0;
  std::string body;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      std::string a, b;
      ss >> a >> b;
      if (key == "origin_nm") {
        image.origin = {parse_number(a), parse_number(b)};
      } else if (key == "pitch_nm") {
        image.pitch = parse_number(a);
      } else if (key == "scale") {
        scale = parse_number(a);
      }
      continue;
    }
    body += line;
    body += '\n';
  }
  std::istringstream ss(body);
  int maxval = 0;
  if (!(ss >> image.width >> image.height >> maxval) || image.width <= 0 || image.height <= 0) {
    throw DomainError("malformed PGM header");
  }
  image.values.resize(static_cast<std::size_t>(image.width) * image.height);
  for (auto& v : image.values) {
    long stored = 0;
    if (!(ss >> stored)) throw DomainError("PGM pixel data truncated");
    v = static_cast<double>(stored) / scale;
  }
  return image;
}

void write_curve_csv(std::ostream& out, std::string_view abscissa, const Curve& curve) {
  out << abscissa << ",value\n";
  for (const auto& p : curve) {
    out << format_number(p.position) << ',' << format_number(p.value) << '\n';
  }
  if (!out) throw std::ios_base::failure("failed writing CSV");
}

NamedCurve read_curve_csv(std::istream& in) {
  NamedCurve result;
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw DomainError("CSV header needs two columns");
  result.abscissa = line.substr(0, comma);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto c = line.find(',');
    if (c == std::string::npos) {
      throw DomainError("CSV line " + std::to_string(lineno) + ": expected two columns");
    }
    const std::string_view view(line);
    result.curve.push_back({parse_number(view.substr(0, c)), parse_number(view.substr(c + 1))});
  }
  return result;
}

}  // namespace csd
