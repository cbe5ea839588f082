#include "coas/fixtures.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace coas::fixtures {

double poly(const Eigen::VectorXd& x, double beta) {
  return x(0) * x(0) + x(0) * x(1) + beta * x(1) * x(1) * x(1);
}

Eigen::VectorXd poly_gradient(const Eigen::VectorXd& x, double beta) {
  Eigen::VectorXd g(2);
  g << 2.0 * x(0) + x(1), x(0) + 3.0 * beta * x(1) * x(1);
  return g;
}

const Domain& piston_ranges() {
  static const Domain ranges = {
      {30.0, 60.0}, {0.005, 0.020}, {0.002, 0.010}, {1000.0, 5000.0}, {340.0, 360.0}};
  return ranges;
}

double piston(const Eigen::VectorXd& unit_x, double p0, double ta) {
  const auto& r = piston_ranges();
  auto at = [&](int i) { return r[i].lo + unit_x(i) * (r[i].hi - r[i].lo); };
  const double M = at(0), S = at(1), V0 = at(2), k = at(3), T0 = at(4);
  const double A = p0 * S + 19.62 * M - k * V0 / S;
  const double c = p0 * V0 * ta / T0;
  const double V = S / (2.0 * k) * (std::sqrt(A * A + 4.0 * k * c) - A);
  return 120.0 * std::numbers::pi * std::sqrt(M / (k + S * S * c / (V * V)));
}

namespace {

std::map<std::string, std::string> parse_query(const std::string& q) {
  std::map<std::string, std::string> out;
  std::istringstream is(q);
  std::string kv;
  while (std::getline(is, kv, '&')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("fixture parameter without value: " + kv);
    }
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

double number(const std::map<std::string, std::string>& q, const std::string& key,
              double fallback) {
  const auto it = q.find(key);
  if (it == q.end()) return fallback;
  std::size_t used = 0;
  const double v = std::stod(it->second, &used);
  if (used != it->second.size()) {
    throw std::invalid_argument("bad number for fixture parameter " + key);
  }
  return v;
}

void reject_unknown(const std::map<std::string, std::string>& q,
                    std::initializer_list<const char*> known) {
  for (const auto& [k, v] : q) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw std::invalid_argument("unknown fixture parameter: " + k);
  }
}

}  // namespace

bool is_builtin(const std::string& uri) { return uri.rfind("builtin:", 0) == 0; }

Fixture resolve(const std::string& uri) {
  if (!is_builtin(uri)) throw std::invalid_argument("not a builtin fixture: " + uri);
  const std::string rest = uri.substr(8);
  const auto qm = rest.find('?');
  const std::string name = rest.substr(0, qm);
  const auto query =
      parse_query(qm == std::string::npos ? std::string{} : rest.substr(qm + 1));
  if (name == "poly") {
    reject_unknown(query, {"beta"});
    const double beta = number(query, "beta", 0.0);
    return {uri, Domain(2, Interval{0.0, 1.0}),
            [beta](const Eigen::VectorXd& x) { return poly(x, beta); },
            [beta](const Eigen::VectorXd& x) { return poly_gradient(x, beta); }};
  }
  if (name == "piston") {
    reject_unknown(query, {"p0", "ta"});
    const double p0 = number(query, "p0", 90000.0);
    const double ta = number(query, "ta", 284.0);
    return {uri, Domain(5, Interval{0.0, 1.0}),
            [p0, ta](const Eigen::VectorXd& x) { return piston(x, p0, ta); },
            nullptr};
  }
  if (name == "linear") {
    reject_unknown(query, {"a"});
    const auto it = query.find("a");
    if (it == query.end()) throw std::invalid_argument("linear fixture needs a=...");
    std::vector<double> a;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ',')) a.push_back(std::stod(tok));
    if (a.empty()) throw std::invalid_argument("linear fixture needs a=...");
    const Eigen::VectorXd av = Eigen::Map<Eigen::VectorXd>(a.data(), a.size());
    return {uri, Domain(a.size(), Interval{0.0, 1.0}),
            [av](const Eigen::VectorXd& x) { return av.dot(x); },
            [av](const Eigen::VectorXd&) { return Eigen::VectorXd(av); }};
  }
  throw std::invalid_argument("unknown builtin fixture: " + name);
}

}  // namespace coas::fixtures
