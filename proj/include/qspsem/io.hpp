#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "poly.hpp"
#include "qsp.hpp"
#include "qsvt.hpp"

namespace qspsem::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Free-form verification result.
struct Report {
  std::string name;
  bool pass = false;
  json data = json::object();

  bool operator==(const Report& o) const { return name == o.name && pass == o.pass && data == o.data; }
};

using Document = std::variant<PhaseList, ComplexPoly, Matrix, QsvtProgram, Report>;

inline const char* kind_name(const Document& d) {
  static const char* names[] = {"phases", "poly", "matrix", "program", "report"};
  return names[d.index()];
}

namespace detail {

inline double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ArgumentError(std::string("serialize: non-finite value in ") + what);
  return v;
}

inline bool all_plus_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0 || std::signbit(x)) return false;
  return true;
}

inline json matrix_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(finite(m(i, j).real(), "matrix"));
      ii.push_back(finite(m(i, j).imag(), "matrix"));
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return {{"kind", "matrix"}, {"schema_version", kSchemaVersion}, {"dim", {m.rows(), m.cols()}}, {"re", re}, {"im", im}};
}

inline json phases_array(const PhaseList& p) {
  json a = json::array();
  for (double v : p.phases()) a.push_back(finite(v, "phases"));
  return a;
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ArgumentError(std::string("parse: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("parse: bad field '") + key + "': " + e.what());
  }
}

inline void check_header(const json& j, const char* kind) {
  if (!j.is_object()) throw ArgumentError("parse: document must be a JSON object");
  if (field<std::string>(j, "kind") != kind)
    throw ArgumentError(std::string("parse: expected a ") + kind + " document");
  if (j.contains("schema_version") && field<int>(j, "schema_version") != kSchemaVersion)
    throw ArgumentError("parse: unsupported schema_version");
}

inline Matrix parse_matrix(const json& j) {
  check_header(j, "matrix");
  const auto dim = field<std::vector<long>>(j, "dim");
  if (dim.size() != 2 || dim[0] < 0 || dim[1] < 0) throw ArgumentError("parse: matrix dim must be [rows, cols]");
  const auto re = field<std::vector<std::vector<double>>>(j, "re");
  std::vector<std::vector<double>> im;
  if (j.contains("im")) im = field<std::vector<std::vector<double>>>(j, "im");
  else im.assign(re.size(), std::vector<double>(static_cast<std::size_t>(dim[1]), 0.0));
  if (re.size() != static_cast<std::size_t>(dim[0]) || im.size() != re.size())
    throw ArgumentError("parse: matrix row count disagrees with dim");
  Matrix m(dim[0], dim[1]);
  for (long i = 0; i < dim[0]; ++i) {
    if (re[i].size() != static_cast<std::size_t>(dim[1]) || im[i].size() != re[i].size())
      throw ArgumentError("parse: matrix column count disagrees with dim");
    for (long k = 0; k < dim[1]; ++k) m(i, k) = cplx(re[i][k], im[i][k]);
  }
  return m;
}

struct ToJson {
  json operator()(const PhaseList& p) const {
    return {{"kind", "phases"}, {"schema_version", kSchemaVersion}, {"phases", phases_array(p)}};
  }
  json operator()(const ComplexPoly& p) const {
    std::vector<double> re, im;
    for (const auto& c : p.coeffs) re.push_back(finite(c.real(), "poly")), im.push_back(finite(c.imag(), "poly"));
    json j = {{"kind", "poly"}, {"schema_version", kSchemaVersion}, {"real", re}};
    if (!all_plus_zero(im)) j["imag"] = im;
    return j;
  }
  json operator()(const Matrix& m) const { return matrix_json(m); }
  json operator()(const QsvtProgram& p) const {
    return {{"kind", "program"},
            {"schema_version", kSchemaVersion},
            {"phases", phases_array(p.phases)},
            {"left", matrix_json(p.left.matrix())},
            {"right", matrix_json(p.right.matrix())},
            {"oracle", p.oracle ? matrix_json(*p.oracle) : json(nullptr)}};
  }
  json operator()(const Report& r) const {
    return {{"kind", "report"}, {"schema_version", kSchemaVersion}, {"name", r.name}, {"pass", r.pass}, {"data", r.data}};
  }
};

}  // namespace detail

inline json to_json(const Document& d) { return std::visit(detail::ToJson{}, d); }

inline Document from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("parse: document must be a JSON object");
  const auto kind = detail::field<std::string>(j, "kind");
  if (kind == "phases") {
    detail::check_header(j, "phases");
    return PhaseList(detail::field<std::vector<double>>(j, "phases"));
  }
  if (kind == "poly") {
    detail::check_header(j, "poly");
    const auto re = detail::field<std::vector<double>>(j, "real");
    std::vector<double> im(re.size(), 0.0);
    if (j.contains("imag")) im = detail::field<std::vector<double>>(j, "imag");
    if (im.size() != re.size()) throw ArgumentError("parse: poly real and imag lengths differ");
    if (re.empty()) throw ArgumentError("parse: poly needs at least one coefficient");
    std::vector<cplx> c(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) c[k] = cplx(re[k], im[k]);
    return ComplexPoly(std::move(c));
  }
  if (kind == "matrix") return detail::parse_matrix(j);
  if (kind == "program") {
    detail::check_header(j, "program");
    std::optional<Matrix> oracle;
    if (j.contains("oracle") && !j.at("oracle").is_null()) oracle = detail::parse_matrix(j.at("oracle"));
    if (!j.contains("left") || !j.contains("right")) throw ArgumentError("parse: program needs left and right");
    return QsvtProgram(PhaseList(detail::field<std::vector<double>>(j, "phases")), Projector(detail::parse_matrix(j.at("left"))),
                       Projector(detail::parse_matrix(j.at("right"))), oracle);
  }
  if (kind == "report") {
    detail::check_header(j, "report");
    Report r{detail::field<std::string>(j, "name"), detail::field<bool>(j, "pass"), json::object()};
    if (j.contains("data")) r.data = j.at("data");
    return r;
  }
  throw ArgumentError("parse: unknown document kind '" + kind + "'");
}

// Doubles are written as the shortest decimal that reads back to the same bits.
inline std::string serialize(const Document& d) { return to_json(d).dump(2) + "\n"; }

inline Document parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("parse: malformed JSON: ") + e.what());
  }
  return from_json(j);
}

inline Document read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  return parse(std::string(std::istreambuf_iterator<char>(in), {}));
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw ArgumentError("cannot write '" + path + "'");
}

template <class T>
T expect(const Document& d, const std::string& what) {
  if (const T* p = std::get_if<T>(&d)) return *p;
  throw ArgumentError(what + ": got a " + kind_name(d) + " document");
}

inline bool same_document(const Document& a, const Document& b) {
  if (a.index() != b.index()) return false;
  auto bits = [](const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const cplx u = x.data()[i], v = y.data()[i];
      if (std::signbit(u.real()) != std::signbit(v.real()) || std::signbit(u.imag()) != std::signbit(v.imag()) || u != v)
        return false;
    }
    return true;
  };
  auto same_list = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] != y[k] || std::signbit(x[k]) != std::signbit(y[k])) return false;
    return true;
  };
  switch (a.index()) {
    case 0: return same_list(std::get<0>(a).phases(), std::get<0>(b).phases());
    case 1: {
      const auto& x = std::get<1>(a).coeffs;
      const auto& y = std::get<1>(b).coeffs;
      return bits(Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size())),
                  Eigen::Map<const Matrix>(y.data(), 1, static_cast<Eigen::Index>(y.size())));
    }
    case 2: return bits(std::get<2>(a), std::get<2>(b));
    case 3: {
      const auto& x = std::get<3>(a);
      const auto& y = std::get<3>(b);
      if (!same_list(x.phases.phases(), y.phases.phases()) || !bits(x.left.matrix(), y.left.matrix()) ||
          !bits(x.right.matrix(), y.right.matrix()) || x.oracle.has_value() != y.oracle.has_value())
        return false;
      return !x.oracle || bits(*x.oracle, *y.oracle);
    }
    default: return std::get<4>(a) == std::get<4>(b);
  }
}

// CSV with a header row, '.' decimals and '\n' line endings whatever the locale.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { line(header); }

  template <class... T>
  void row(const T&... v) {
    static_assert(sizeof...(T) > 0);
    if (sizeof...(T) != width_) throw InternalConsistencyError("csv: row width differs from header");
    std::vector<std::string> cells{cell(v)...};
    line(cells);
  }

  const std::string& str() const { return text_; }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class N>
  static std::string cell(N v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) text_ += (k ? "," : "") + cells[k];
    text_ += '\n';
  }

  std::size_t width_;
  std::string text_;
};

}  // namespace qspsem::io
