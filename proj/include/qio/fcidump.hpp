#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qio/errors.hpp"
#include "qio/hamiltonian.hpp"

namespace qio {

namespace detail {

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

}  // namespace detail

/// Reads an FCIDUMP stream: Fortran-style namelist header (NORB, NELEC,
/// MS2; other keys such as ORBSYM/ISYM are accepted and ignored) followed
/// by `value p q r s` records with 1-based indices.  Each two-body record
/// populates all eight symmetry-equivalent slots; unspecified integrals
/// stay zero.
inline MolecularHamiltonian parse_fcidump(std::istream& in) {
  long line_no = 0;
  std::string line;

  // collect the header up to &END or /
  std::string header;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string up = detail::upper(line);
    auto end_pos = up.find("&END");
    if (end_pos == std::string::npos) end_pos = up.find('/');
    if (end_pos != std::string::npos) {
      header += ' ' + line.substr(0, end_pos);
      header_done = true;
      break;
    }
    header += ' ' + line;
  }
  if (!header_done) throw ParseError("FCIDUMP header lacks &END or / terminator", line_no);

  std::string up = detail::upper(header);
  const auto amp = up.find("&FCI");
  if (amp == std::string::npos) throw ParseError("FCIDUMP header lacks &FCI", 1);
  up = up.substr(amp + 4);

  // split into KEY=VALUE tokens; list values (ORBSYM=1,1,...) are skipped
  // by consuming digits after the ones we care about
  auto get_int = [&](const std::string& key, bool required, long def) -> long {
    auto pos = up.find(key);
    while (pos != std::string::npos) {
      // must be a whole word
      const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(up[pos - 1]));
      if (left_ok) break;
      pos = up.find(key, pos + 1);
    }
    if (pos == std::string::npos) {
      if (required) throw ParseError("FCIDUMP header missing " + key, 1);
      return def;
    }
    pos += key.size();
    while (pos < up.size() && (std::isspace(static_cast<unsigned char>(up[pos])) || up[pos] == '='))
      ++pos;
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(up.substr(pos), &used);
    } catch (const std::exception&) {
      throw ParseError("FCIDUMP header has malformed value for " + key, 1);
    }
    if (used == 0) throw ParseError("FCIDUMP header has malformed value for " + key, 1);
    return value;
  };

  const long norb = get_int("NORB", true, 0);
  const long nelec = get_int("NELEC", true, 0);
  const long ms2 = get_int("MS2", false, 0);
  if (norb <= 0) throw ParseError("NORB must be positive", 1);
  if (nelec < 0 || nelec > 2 * norb) throw ParseError("NELEC out of range", 1);

  MolecularHamiltonian h(static_cast<std::size_t>(norb),
                         static_cast<std::size_t>(nelec), static_cast<int>(ms2));

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    double value;
    long p, q, r, s;
    if (!(ls >> value >> p >> q >> r >> s))
      throw ParseError("malformed integral record", line_no);
    if (!std::isfinite(value))
      throw ValueError("non-finite integral value at line " + std::to_string(line_no));
    auto check = [&](long i) {
      if (i < 0 || i > norb)
        throw IndexError("orbital index " + std::to_string(i) +
                         " out of range in record at line " + std::to_string(line_no));
    };
    check(p); check(q); check(r); check(s);

    if (p == 0 && q == 0 && r == 0 && s == 0) {
      h.core_energy = value;
    } else if (r == 0 && s == 0 && q == 0) {
      // orbital-energy record; carries no independent information here
    } else if (r == 0 && s == 0) {
      if (p == 0 || q == 0)
        throw IndexError("one-body record with zero index at line " + std::to_string(line_no));
      h.one_body(p - 1, q - 1) = value;
      h.one_body(q - 1, p - 1) = value;
    } else {
      if (p == 0 || q == 0 || r == 0 || s == 0)
        throw IndexError("two-body record with zero index at line " + std::to_string(line_no));
      h.set_two_body(p - 1, q - 1, r - 1, s - 1, value);
    }
  }
  return h;
}

/// Writes the unique-integral records (canonical index order, magnitude
/// above 1e-14) so that parse_fcidump(write_fcidump(h)) == h.
inline void write_fcidump(const MolecularHamiltonian& h, std::ostream& out) {
  const std::size_t m = h.n_orbitals;
  out << "&FCI NORB=" << m << ",NELEC=" << h.n_electrons << ",MS2=" << h.ms2
      << ",\n&END\n";
  out << std::scientific << std::setprecision(16);
  auto emit = [&](double v, std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    out << std::setw(24) << v << ' ' << p << ' ' << q << ' ' << r << ' ' << s << '\n';
    if (!out) throw IoError("failed writing FCIDUMP record");
  };
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r <= p; ++r)
        for (std::size_t s = 0; s <= r; ++s) {
          if (p * m + q < r * m + s) continue;
          const double v = h.two_body(p, q, r, s);
          if (std::abs(v) > 1e-14) emit(v, p + 1, q + 1, r + 1, s + 1);
        }
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q <= p; ++q) {
      const double v = h.one_body(p, q);
      if (std::abs(v) > 1e-14) emit(v, p + 1, q + 1, 0, 0);
    }
  emit(h.core_energy, 0, 0, 0, 0);
}

}  // namespace qio
