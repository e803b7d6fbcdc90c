#include "nilflow/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace nilflow {

using nlohmann::json;

namespace {

std::string line_context(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
  const std::size_t start = text.rfind('\n', byte == 0 ? 0 : byte - 1);
  const std::size_t begin = (start == std::string_view::npos) ? 0 : start + 1;
  const std::size_t end = std::min(text.find('\n', begin), text.size());
  std::ostringstream s;
  s << "line " << line << ", column " << (byte - begin + 1) << ": " << text.substr(begin, end - begin);
  return s.str();
}

int one_based(const json& v, int dim, const std::string& what) {
  if (!v.is_number_integer()) throw ValidationError(what + ": index must be an integer");
  const int i = v.get<int>();
  if (i < 1 || i > dim) throw ValidationError(what + ": index " + std::to_string(i) + " out of range 1.." + std::to_string(dim));
  return i - 1;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ValidationError(what + ": expected a number");
  return v.get<double>();
}

std::vector<TensorEntry> entries(const json& list, int dim, int arity, const std::string& what) {
  if (!list.is_array()) throw ValidationError(what + " must be a list of [indices..., value]");
  std::vector<TensorEntry> out;
  for (const auto& row : list) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(arity + 1))
      throw ValidationError(what + ": each entry needs " + std::to_string(arity) + " indices and a value");
    TensorEntry e;
    for (int p = 0; p < arity; ++p) e.index.push_back(one_based(row[p], dim, what));
    e.value = number(row[arity], what);
    out.push_back(std::move(e));
  }
  return out;
}

Metric metric_from(const json& doc, int dim) {
  if (doc.contains("g") && doc.contains("g_diag")) throw ValidationError("give either \"g\" or \"g_diag\", not both");
  if (doc.contains("g_diag")) {
    const auto& d = doc["g_diag"];
    if (!d.is_array() || d.size() != static_cast<std::size_t>(dim)) throw ValidationError("g_diag needs dim entries");
    std::vector<double> v;
    for (const auto& x : d) v.push_back(number(x, "g_diag"));
    return Metric::diagonal(v);
  }
  const auto& rows = doc["g"];
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(dim)) throw ValidationError("g needs dim rows");
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(dim))
      throw ValidationError("g needs dim columns in every row");
    for (int j = 0; j < dim; ++j) g(i, j) = number(rows[i][j], "g");
  }
  return Metric(std::move(g));
}

}  // namespace

Problem parse_problem(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(origin) + ": malformed JSON at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw ValidationError(std::string(origin) + ": top level must be an object");
  static const char* known[] = {"dim", "mu", "H", "g", "g_diag", "theta", "orientation"};
  for (const auto& [key, value] : doc.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
      throw ValidationError(std::string(origin) + ": unknown key \"" + key + "\"");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) throw ValidationError(std::string(origin) + ": missing integer \"dim\"");
  const int n = doc["dim"].get<int>();
  if (n < 1 || n > kMaxDim) throw ValidationError(std::string(origin) + ": dim must be in 1.." + std::to_string(kMaxDim));

  Problem p;
  p.source = std::string(origin);
  const auto mu_entries = doc.contains("mu") ? entries(doc["mu"], n, 3, "mu") : std::vector<TensorEntry>{};
  p.mu = LieBracket::from_entries(n, mu_entries);
  if (doc.contains("H")) {
    if (n < 3) throw ValidationError("H needs dim >= 3");
    const auto h = entries(doc["H"], n, 3, "H");
    p.h = KForm::from_entries(n, 3, h);
  }
  if (doc.contains("g") || doc.contains("g_diag")) p.g = metric_from(doc, n);
  if (doc.contains("theta")) {
    const auto& t = doc["theta"];
    if (!t.is_array() || t.size() != static_cast<std::size_t>(n)) throw ValidationError("theta needs dim entries");
    std::vector<double> v;
    for (const auto& x : t) v.push_back(number(x, "theta"));
    p.theta = KForm::from_packed(n, 1, std::move(v));
  }
  if (doc.contains("orientation")) {
    const auto& o = doc["orientation"];
    if (o == 1)
      p.orientation = Orientation::positive;
    else if (o == -1)
      p.orientation = Orientation::negative;
    else
      throw ValidationError("orientation must be 1 or -1");
  }
  return p;
}

std::optional<Problem> builtin_problem(std::string_view name) {
  static const std::regex heis_h(R"(heisenberg3\+H\(\s*([-+0-9.eE]+)\s*\))");
  static const std::regex abelian(R"(abelian\(\s*([0-9]+)\s*\))");
  const std::string s(name);
  std::smatch m;
  Problem p;
  p.source = s;
  if (s == "heisenberg3") {
    p.mu = heisenberg();
    p.g = Metric::identity(3);
    return p;
  }
  if (std::regex_match(s, m, heis_h)) {
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(m[1].str(), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != static_cast<std::size_t>(m[1].length()) || !std::isfinite(a)) throw ValidationError("bad parameter in fixture " + s);
    p.mu = heisenberg();
    p.g = Metric::identity(3);
    p.h = KForm::basis(3, {0, 1, 2}).scaled(a);
    return p;
  }
  if (std::regex_match(s, m, abelian)) {
    const int n = std::stoi(m[1].str());
    if (n < 1 || n > kMaxDim) throw ValidationError("abelian(n) needs 1 <= n <= " + std::to_string(kMaxDim));
    p.mu = LieBracket(n);
    p.g = Metric::identity(n);
    return p;
  }
  return std::nullopt;
}

Problem load_problem(const std::string& source) {
  if (auto p = builtin_problem(source)) return *p;
  std::ifstream in(source, std::ios::binary);
  if (!in) throw IoError("cannot open " + source + " (not a file and not a built-in fixture)");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + source);
  return parse_problem(buf.str(), source);
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.size() == 0) throw ValidationError("empty trajectory");
  out << 't';
  for (const auto& l : traj.labels) out << ',' << l;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < traj.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[r]);
    out << buf;
    for (Eigen::Index c = 0; c < traj.states[r].size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.states[r](c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void emit_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_trajectory_csv(traj, out);
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

Trajectory read_trajectory_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV");
  auto header = split(line);
  if (header.empty() || header[0] != "t") throw ValidationError("CSV header must start with t");
  Trajectory traj;
  traj.labels.assign(header.begin() + 1, header.end());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ValidationError("CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells");
    std::vector<double> v;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double x = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') throw ValidationError("CSV row " + std::to_string(row) + ": bad number '" + c + "'");
      v.push_back(x);
    }
    traj.times.push_back(v[0]);
    traj.states.push_back(Eigen::Map<const Vector>(v.data() + 1, static_cast<Eigen::Index>(v.size() - 1)));
  }
  traj.accepted = traj.size() > 0 ? static_cast<long>(traj.size()) - 1 : 0;
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_trajectory_csv(in);
}

// ---------------------------------------------------------------------------

std::string phase_svg(const Trajectory& traj, const std::string& x_col, const std::string& y_col) {
  if (traj.size() == 0) throw ValidationError("empty trajectory");
  const std::vector<double> xs = traj.column(x_col);
  const std::vector<double> ys = traj.column(y_col);
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw NumericalError("non-finite value in plotted columns");

  constexpr double width = 640, height = 480, left = 70, right = 20, top = 30, bottom = 50;
  auto range = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double a = *lo, b = *hi;
    if (b - a < 1e-12 * std::max(1.0, std::abs(a))) {
      const double pad = std::max(0.5, 0.1 * std::abs(a));
      a -= pad;
      b += pad;
    }
    return std::pair{a, b};
  };
  const auto [x0, x1] = range(xs);
  const auto [y0, y1] = range(ys);
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::string s;
  char buf[256];
  auto put = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    s += buf;
  };
  put("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", width, height,
      width, height);
  put("<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", width, height);
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", left, top + ph, left + pw, top + ph);
  put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", left, top, left, top + ph);
  s += "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"start\">%.6g</text>\n", left, top + ph + 16, x0);
  put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.6g</text>\n", left + pw, top + ph + 16, x1);
  put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.6g</text>\n", left - 6, top + ph, y0);
  put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.6g</text>\n", left - 6, top + 10, y1);
  s += "<text x=\"" + std::to_string(static_cast<int>(left + pw / 2)) + "\" y=\"" +
       std::to_string(static_cast<int>(height - 12)) + "\" text-anchor=\"middle\">" + x_col + "</text>\n";
  s += "<text x=\"16\" y=\"" + std::to_string(static_cast<int>(top + ph / 2)) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       std::to_string(static_cast<int>(top + ph / 2)) + ")\">" + y_col + "</text>\n";
  s += "</g>\n";
  if (xs.size() == 1) {
    put("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"4\" fill=\"steelblue\"/>\n", px(xs[0]), py(ys[0]));
  } else {
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      put("%s%.3f,%.3f", i == 0 ? "" : " ", px(xs[i]), py(ys[i]));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

void emit_phase_svg(const Trajectory& traj, const std::string& x_col, const std::string& y_col,
                    const std::filesystem::path& path) {
  const std::string svg = phase_svg(traj, x_col, y_col);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace nilflow
