#include "sparsetc/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sparsetc/error.hpp"

namespace sparsetc {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Tensor read_matrix_market(std::istream& in, const std::string& name,
                          std::string_view format_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("matrix market: empty input");
  std::istringstream header(line);
  std::string banner, object, layout, field, symmetry;
  header >> banner >> object >> layout >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix")
    throw DataError("matrix market: missing '%%MatrixMarket matrix' banner");
  if (lower(layout) != "coordinate")
    throw DataError("matrix market: only the coordinate layout is supported");
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "pattern" && field != "double")
    throw DataError("matrix market: unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw DataError("matrix market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line) && blank_or_comment(line)) {
  }
  Index rows = 0, cols = 0, count = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> count) || rows <= 0 || cols <= 0 || count < 0)
      throw DataError("matrix market: bad size line");
  }

  std::vector<Entry> entries;
  entries.reserve(symmetry == "general" ? count : 2 * count);
  Index seen = 0;
  while (seen < count && std::getline(in, line)) {
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    Index r = 0, c = 0;
    double v = 1.0;
    if (!(ls >> r >> c)) throw DataError("matrix market: bad entry line '" + line + "'");
    if (field != "pattern" && !(ls >> v))
      throw DataError("matrix market: missing value in line '" + line + "'");
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw DataError("matrix market: entry index out of range");
    entries.push_back({{r - 1, c - 1}, v});
    if (symmetry != "general" && r != c)
      entries.push_back({{c - 1, r - 1}, symmetry == "skew-symmetric" ? -v : v});
    ++seen;
  }
  if (seen != count) throw DataError("matrix market: fewer entries than declared");
  return build_from_entries(name, TensorFormat::named(format_name, {rows, cols}), entries);
}

Tensor read_matrix_market_file(const std::string& path, const std::string& name,
                               std::string_view format_name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_matrix_market(in, name, format_name);
}

void write_matrix_market(std::ostream& out, const Tensor& t) {
  if (t.order() != 2) throw ShapeError("matrix market output requires an order-2 tensor");
  const std::vector<Entry> entries = stored_entries(t);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << t.shape()[0] << ' ' << t.shape()[1] << ' ' << entries.size() << '\n';
  char buf[64];
  for (const Entry& e : entries) {
    auto res = std::to_chars(buf, buf + sizeof buf, e.value);
    out << e.coords[0] + 1 << ' ' << e.coords[1] + 1 << ' '
        << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

void write_matrix_market_file(const std::string& path, const Tensor& t) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_matrix_market(out, t);
  if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace sparsetc
