#include "sgflow/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "sgflow/errors.hpp"
#include "sgflow/operators.hpp"

namespace sgflow {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void append(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto l : split(text, '\n'))
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

void write_state(const FlowState& state, const fs::path& stem) {
  const auto& g = state.u.grid();
  const bool has_stream = state.u.stream().has_value();
  std::string csv = "i,j,r,theta,u1,u2,q,psi,phi\n";
  csv.reserve(g.size() * 160);
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      csv += std::to_string(i);
      csv += ',';
      csv += std::to_string(j);
      for (double v : {g.r(i), g.theta(j), state.u.u1()(i, j), state.u.u2()(i, j), state.q(i, j),
                       state.psi(i, j), has_stream ? (*state.u.stream())(i, j) : 0.0}) {
        csv += ',';
        append(csv, v);
      }
      csv += '\n';
    }
  nlohmann::json meta{{"t", state.t},
                      {"n_r", g.n_r()},
                      {"n_theta", g.n_theta()},
                      {"r_max", g.r_max()},
                      {"stretch", g.stretch()},
                      {"has_stream", has_stream}};
  fs::path csv_path = stem, json_path = stem;
  csv_path += ".csv";
  json_path += ".json";
  write_text_atomic(csv_path, csv);
  write_text_atomic(json_path, meta.dump(2) + "\n");
}

FlowState read_state(const fs::path& stem, const GridPtr& grid) {
  fs::path csv_path = stem, json_path = stem;
  csv_path += ".csv";
  json_path += ".json";
  const auto meta = nlohmann::json::parse(read_text(json_path));
  if (meta.at("n_r").get<int>() != grid->n_r() || meta.at("n_theta").get<int>() != grid->n_theta())
    throw std::runtime_error("snapshot " + stem.string() + " does not match the run grid");
  const bool has_stream = meta.at("has_stream").get<bool>();

  FlowState st;
  st.t = meta.at("t").get<double>();
  ScalarField u1(grid), u2(grid), q(grid), psi(grid), phi(grid);
  const std::string text = read_text(csv_path);
  const auto lines = lines_of(text);
  if (lines.size() != grid->size() + 1)
    throw std::runtime_error("snapshot " + csv_path.string() + " has the wrong number of rows");
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cols = split(lines[k], ',');
    if (cols.size() != 9) throw std::runtime_error("malformed snapshot row in " + csv_path.string());
    const int i = static_cast<int>(to_double(cols[0]));
    const int j = static_cast<int>(to_double(cols[1]));
    u1(i, j) = to_double(cols[4]);
    u2(i, j) = to_double(cols[5]);
    q(i, j) = to_double(cols[6]);
    psi(i, j) = to_double(cols[7]);
    phi(i, j) = to_double(cols[8]);
  }
  st.u = VectorField(std::move(u1), std::move(u2));
  if (has_stream) st.u.set_stream(std::move(phi));
  st.q = std::move(q);
  st.psi = std::move(psi);
  return st;
}

namespace {

struct Column {
  const char* name;
  double StepRecord::*field;
};

constexpr Column kColumns[] = {
    {"t", &StepRecord::t},
    {"dt", &StepRecord::dt},
    {"energy", &StepRecord::energy},
    {"u_l2_sq", &StepRecord::u_l2_sq},
    {"grad_u_sq", &StepRecord::grad_u_sq},
    {"cutoff_term", &StepRecord::cutoff_term},
    {"stream_l2_sq", &StepRecord::stream_l2_sq},
    {"stream_grad_sq", &StepRecord::stream_grad_sq},
    {"u_h1", &StepRecord::u_h1},
    {"u_h3", &StepRecord::u_h3},
    {"u_linf", &StepRecord::u_linf},
    {"q_l1", &StepRecord::q_l1},
    {"q_l2", &StepRecord::q_l2},
    {"q_h1", &StepRecord::q_h1},
    {"q_min", &StepRecord::q_min},
    {"q_max", &StepRecord::q_max},
    {"support_diameter", &StepRecord::support_diameter},
    {"support_outer_radius", &StepRecord::support_outer_radius},
    {"max_displacement", &StepRecord::max_displacement},
    {"elliptic_residual", &StepRecord::elliptic_residual},
};

}  // namespace

std::string steps_csv(const std::vector<StepRecord>& steps) {
  std::string out = "step,window";
  for (const auto& c : kColumns) {
    out += ',';
    out += c.name;
  }
  out += '\n';
  for (const auto& s : steps) {
    out += std::to_string(s.step);
    out += ',';
    out += std::to_string(s.window);
    for (const auto& c : kColumns) {
      out += ',';
      append(out, s.*c.field);
    }
    out += '\n';
  }
  return out;
}

std::vector<StepRecord> parse_steps_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw std::runtime_error("empty step log");
  const auto header = split(lines[0], ',');
  constexpr std::size_t n_cols = std::size(kColumns) + 2;
  if (header.size() != n_cols || header[0] != "step" || header[1] != "window")
    throw std::runtime_error("unexpected step log header");
  for (std::size_t c = 0; c < std::size(kColumns); ++c)
    if (header[c + 2] != kColumns[c].name)
      throw std::runtime_error("unexpected step log column " + std::string(header[c + 2]));
  std::vector<StepRecord> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cols = split(lines[k], ',');
    if (cols.size() != n_cols) throw std::runtime_error("malformed step log row");
    StepRecord s;
    s.step = static_cast<int>(to_double(cols[0]));
    s.window = static_cast<int>(to_double(cols[1]));
    for (std::size_t c = 0; c < std::size(kColumns); ++c) s.*kColumns[c].field = to_double(cols[c + 2]);
    out.push_back(s);
  }
  return out;
}

}  // namespace sgflow
