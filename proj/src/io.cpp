#include "coas/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coas/error.hpp"

namespace coas::io {

json provenance_json(const Provenance& p) {
  return {{"tool", "coas"}, {"version", kToolVersion}, {"seed", p.seed},
          {"config_hash", p.config_hash}};
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json model_to_json(const MarsSurrogate& m) {
  json j;
  j["label"] = m.label();
  j["p"] = m.p();
  j["domain"] = json::array();
  for (const auto& iv : m.domain()) j["domain"].push_back({iv.lo, iv.hi});
  j["intercept"] = m.intercept();
  j["terms"] = json::array();
  for (const auto& t : m.terms()) {
    json tj{{"coef", t.coef}, {"factors", json::array()}};
    for (const auto& f : t.factors) {
      tj["factors"].push_back({{"var", f.var}, {"sign", f.sign}, {"knot", f.knot}});
    }
    j["terms"].push_back(std::move(tj));
  }
  return j;
}

MarsSurrogate model_from_json(const json& j) {
  try {
    const int p = j.at("p").get<int>();
    Domain domain;
    for (const auto& d : j.at("domain")) {
      if (d.size() != 2) throw FormatError("model domain entries must be [lo, hi]");
      domain.push_back({d[0].get<double>(), d[1].get<double>()});
    }
    if (static_cast<int>(domain.size()) != p) {
      throw FormatError("model domain length differs from p");
    }
    std::vector<BasisTerm> terms;
    for (const auto& tj : j.at("terms")) {
      BasisTerm t;
      t.coef = tj.at("coef").get<double>();
      for (const auto& fj : tj.at("factors")) {
        t.factors.push_back({fj.at("var").get<int>(), fj.at("sign").get<int>(),
                             fj.at("knot").get<double>()});
      }
      terms.push_back(std::move(t));
    }
    return MarsSurrogate(std::move(domain), j.at("intercept").get<double>(),
                         std::move(terms), j.value("label", std::string{}));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model JSON: ") + e.what());
  }
}

json prior_to_json(const InputPrior& prior) {
  json dims = json::array();
  for (const auto& m : prior.dims()) {
    if (const auto* u = std::get_if<Uniform>(&m.distribution())) {
      dims.push_back({{"type", "uniform"}, {"lo", u->lo}, {"hi", u->hi}});
    } else {
      const auto& n = std::get<Normal>(m.distribution());
      json d{{"type", "normal"}, {"mean", n.mean}, {"sd", n.sd}};
      if (std::isfinite(n.lo)) d["trunc_lo"] = n.lo;
      if (std::isfinite(n.hi)) d["trunc_hi"] = n.hi;
      dims.push_back(std::move(d));
    }
  }
  return {{"p", prior.p()}, {"dims", dims}};
}

InputPrior prior_from_json(const json& j) {
  try {
    std::vector<Marginal> dims;
    for (const auto& d : j.at("dims")) {
      const auto type = d.at("type").get<std::string>();
      if (type == "uniform") {
        dims.emplace_back(Uniform{d.at("lo").get<double>(), d.at("hi").get<double>()});
      } else if (type == "normal") {
        dims.emplace_back(Normal{d.at("mean").get<double>(), d.at("sd").get<double>(),
                                 d.value("trunc_lo", -kInf), d.value("trunc_hi", kInf)});
      } else {
        throw FormatError("unsupported prior family: " + type);
      }
    }
    if (j.at("p").get<int>() != static_cast<int>(dims.size())) {
      throw FormatError("prior p differs from number of dims");
    }
    return InputPrior(std::move(dims));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed prior JSON: ") + e.what());
  }
}

Domain prior_domain(const InputPrior& prior) {
  Domain out;
  for (const auto& m : prior.dims()) {
    if (const auto* u = std::get_if<Uniform>(&m.distribution())) {
      out.push_back({u->lo, u->hi});
    } else {
      const auto& n = std::get<Normal>(m.distribution());
      out.push_back({std::isfinite(n.lo) ? n.lo : n.mean - 6.0 * n.sd,
                     std::isfinite(n.hi) ? n.hi : n.mean + 6.0 * n.sd});
    }
  }
  return out;
}

json eigen_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd eigen_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw FormatError("ragged matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json matrix_to_json(const CoActiveMatrix& c) {
  return {{"labels", {c.label_k, c.label_l}},
          {"kind", c.kind == MatrixKind::plain ? "plain" : "modified"},
          {"trace", c.trace},
          {"entries", eigen_to_json(c.entries)}};
}

CoActiveMatrix matrix_from_json(const json& j) {
  try {
    const auto labels = j.at("labels");
    const auto kind = j.value("kind", std::string("plain"));
    return CoActiveMatrix::from_entries(
        eigen_from_json(j.at("entries")), labels.at(0).get<std::string>(),
        labels.at(1).get<std::string>(),
        kind == "modified" ? MatrixKind::modified : MatrixKind::plain);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed matrix JSON: ") + e.what());
  }
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string comment_line(const Provenance& prov) {
  return "# coas " + std::string(kToolVersion) + " seed=" + std::to_string(prov.seed) +
         " config=" + prov.config_hash + "\n";
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string matrix_to_csv(const Eigen::MatrixXd& m, const Provenance& prov) {
  std::string out = comment_line(prov);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += fmt17(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Dataset parse_csv(const std::string& text, const std::string& response) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.size() < 2) throw FormatError("CSV needs a header with >= 2 columns", lineno);
  std::size_t resp = header.size() - 1;
  if (!response.empty()) {
    const auto it = std::find(header.begin(), header.end(), response);
    if (it == header.end()) throw FormatError("response column not found: " + response);
    resp = static_cast<std::size_t>(it - header.begin());
  }
  Dataset d;
  d.response_name = header[resp];
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != resp) d.input_names.push_back(header[c]);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw FormatError("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        lineno);
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::size_t used = 0;
      try {
        row[c] = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[c].size()) {
        throw FormatError("non-numeric field '" + fields[c] + "'", lineno);
      }
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(header.size() - 1);
  d.X.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (std::size_t f = 0; f < rows[i].size(); ++f) {
      if (f == resp) {
        d.y(i) = rows[i][f];
      } else {
        d.X(i, c++) = rows[i][f];
      }
    }
  }
  return d;
}

Dataset read_csv(const fs::path& path, const std::string& response) {
  return parse_csv(read_text(path), response);
}

std::string dataset_to_csv(const Dataset& d, const Provenance& prov) {
  std::string out = comment_line(prov);
  for (const auto& n : d.input_names) out += n + ",";
  out += d.response_name + "\n";
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    for (Eigen::Index c = 0; c < d.X.cols(); ++c) out += fmt17(d.X(i, c)) + ",";
    out += fmt17(d.y(i)) + "\n";
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text, bool force) {
  if (!force && fs::exists(path)) {
    throw std::runtime_error(path.string() + " exists (use --force to overwrite)");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j, bool force) {
  write_text(path, j.dump(2) + "\n", force);
}

MarsSurrogate load_model(const fs::path& path) {
  return model_from_json(read_json(path));
}

Ensemble load_ensemble(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("member_", 0) == 0 &&
          e.path().extension() == ".json") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError(path.string() + ": no member_*.json files");
    std::vector<MarsSurrogate> members;
    for (const auto& f : files) members.push_back(load_model(f));
    std::string label = path.filename().string();
    if (label.empty()) label = path.parent_path().filename().string();
    return Ensemble(label, std::move(members));
  }
  MarsSurrogate m = load_model(path);
  std::string label = m.label().empty() ? path.stem().string() : m.label();
  return Ensemble(label, {std::move(m)});
}

void save_ensemble(const fs::path& dir, const Ensemble& e, const Provenance& prov,
                   bool force) {
  for (std::size_t b = 0; b < e.size(); ++b) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%04zu.json", b);
    json j = model_to_json(e.members()[b]);
    j["meta"] = provenance_json(prov);
    write_json(dir / name, j, force);
  }
}

}  // namespace coas::io
