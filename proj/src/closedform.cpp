#include "coas/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "coas/error.hpp"

namespace coas {
namespace {

// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

Bounds factor_support(const HingeFactor& f) {
  return f.sign > 0 ? Bounds{f.knot, kInf} : Bounds{-kInf, f.knot};
}

// Integral of (x - c)^r over [a, b], taken on the law of x - c.
double centered_moment(const Marginal& mu, int r, Bounds s, double c) {
  if (!(s.a < s.b)) return 0.0;
  if (r == 0) return truncated_moment(mu, 0, s.a, s.b);
  return truncated_moment(mu.shifted(c), r, s.a - c, s.b - c);
}

void check_pair(const MarsSurrogate& mk, const MarsSurrogate& ml,
                const InputPrior& prior) {
  if (mk.p() != ml.p() || mk.p() != prior.p()) {
    throw DimensionError("surrogates and prior disagree on input dimension");
  }
}

// Per-term lookup of the factor on each input (nullptr when absent).
std::vector<std::vector<const HingeFactor*>> factor_table(const MarsSurrogate& m) {
  std::vector<std::vector<const HingeFactor*>> out(
      m.terms().size(), std::vector<const HingeFactor*>(m.p(), nullptr));
  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    for (const auto& f : m.terms()[t].factors) out[t][f.var] = &f;
  }
  return out;
}

std::vector<int> merged_vars(const BasisTerm& a, const BasisTerm& b) {
  std::vector<int> vars;
  for (const auto& f : a.factors) vars.push_back(f.var);
  for (const auto& f : b.factors) {
    if (!a.factor_for(f.var)) vars.push_back(f.var);
  }
  return vars;
}

// Per-input M_k x M_l tables of I1 (k,l), I1 (l,k) (indexed [m1, m2]), I2, I3.
struct IntegralTables {
  std::vector<Eigen::MatrixXd> i1_kl, i1_lk, i2, i3;
};

IntegralTables build_tables(const MarsSurrogate& mk, const MarsSurrogate& ml,
                            const InputPrior& prior, bool trace_only) {
  const auto fk = factor_table(mk);
  const auto fl = factor_table(ml);
  const Eigen::Index Mk = fk.size(), Ml = fl.size();
  IntegralTables tab;
  const int p = prior.p();
  tab.i2.assign(p, Eigen::MatrixXd(Mk, Ml));
  tab.i3.assign(p, Eigen::MatrixXd(Mk, Ml));
  if (!trace_only) {
    tab.i1_kl.assign(p, Eigen::MatrixXd(Mk, Ml));
    tab.i1_lk.assign(p, Eigen::MatrixXd(Mk, Ml));
  }
  for (int i = 0; i < p; ++i) {
    const Marginal& mu = prior[i];
    for (Eigen::Index a = 0; a < Mk; ++a) {
      for (Eigen::Index b = 0; b < Ml; ++b) {
        const HingeFactor* hk = fk[a][i];
        const HingeFactor* hl = fl[b][i];
        tab.i2[i](a, b) = integral_i2(hk, hl, mu);
        tab.i3[i](a, b) = integral_i3(hk, hl, mu);
        if (!trace_only) {
          tab.i1_kl[i](a, b) = integral_i1(hk, hl, mu);
          tab.i1_lk[i](a, b) = integral_i1(hl, hk, mu);
        }
      }
    }
  }
  return tab;
}

Eigen::MatrixXd assemble(const MarsSurrogate& mk, const MarsSurrogate& ml,
                         const IntegralTables& tab, bool trace_only) {
  const int p = mk.p();
  std::vector<Accumulator> acc(static_cast<std::size_t>(p) * p);
  const auto& tk = mk.terms();
  const auto& tl = ml.terms();
  for (std::size_t a = 0; a < tk.size(); ++a) {
    for (std::size_t b = 0; b < tl.size(); ++b) {
      const double gg = tk[a].coef * tl[b].coef;
      if (gg == 0.0) continue;
      const std::vector<int> vars = merged_vars(tk[a], tl[b]);
      // Inputs outside `vars` have I2 = 1 and I1 = I3 = 0.
      auto i2_except = [&](int skip1, int skip2) {
        double prod = 1.0;
        for (int v : vars) {
          if (v != skip1 && v != skip2) prod *= tab.i2[v](a, b);
        }
        return prod;
      };
      for (const auto& fa : tk[a].factors) {
        const int i = fa.var;
        if (tl[b].factor_for(i)) {
          acc[i * p + i].add(gg * tab.i3[i](a, b) * i2_except(i, i));
        }
        if (trace_only) continue;
        for (const auto& fb : tl[b].factors) {
          const int j = fb.var;
          if (j == i) continue;
          acc[i * p + j].add(gg * tab.i1_kl[i](a, b) * tab.i1_lk[j](a, b) *
                             i2_except(i, j));
        }
      }
    }
  }
  Eigen::MatrixXd C(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) C(i, j) = acc[i * p + j].value();
  }
  return C;
}

}  // namespace

CoActiveMatrix CoActiveMatrix::from_entries(Eigen::MatrixXd entries,
                                            std::string label_k,
                                            std::string label_l,
                                            MatrixKind kind) {
  if (entries.rows() != entries.cols()) {
    throw DimensionError("co-active matrix must be square");
  }
  CoActiveMatrix out;
  out.trace = entries.trace();
  out.entries = std::move(entries);
  out.label_k = std::move(label_k);
  out.label_l = std::move(label_l);
  out.kind = kind;
  return out;
}

Bounds integration_bounds(const HingeFactor* fk, const HingeFactor* fl) {
  Bounds s{-kInf, kInf};
  if (fk && fl) {
    const int sk = fk->sign, sl = fl->sign;
    const double tk = fk->knot, tl = fl->knot;
    if (sk > 0 && sl > 0) {
      s = {std::max(tk, tl), kInf};
    } else if (sk > 0 && sl < 0) {
      s = {tk, tl};
    } else if (sk < 0 && sl > 0) {
      s = {tl, tk};
    } else {
      s = {-kInf, std::min(tk, tl)};
    }
  } else if (fk) {
    s = factor_support(*fk);
  } else if (fl) {
    s = factor_support(*fl);
  }
  s.b = std::max(s.b, s.a);
  return s;
}

double integral_i1(const HingeFactor* fk, const HingeFactor* fl,
                   const Marginal& mu) {
  if (!fk) return 0.0;
  const Bounds s = integration_bounds(fk, fl);
  if (!fl) return fk->sign * centered_moment(mu, 0, s, 0.0);
  return fk->sign * fl->sign * centered_moment(mu, 1, s, fl->knot);
}

double integral_i2(const HingeFactor* fk, const HingeFactor* fl,
                   const Marginal& mu) {
  const Bounds s = integration_bounds(fk, fl);
  if (fk && fl) {
    // (x - tk)(x - tl) = y (y - (tl - tk)) with y = x - tk.
    const double d = fl->knot - fk->knot;
    const double m2 = centered_moment(mu, 2, s, fk->knot);
    const double m1 = centered_moment(mu, 1, s, fk->knot);
    return fk->sign * fl->sign * (m2 - d * m1);
  }
  if (fk) return fk->sign * centered_moment(mu, 1, s, fk->knot);
  if (fl) return fl->sign * centered_moment(mu, 1, s, fl->knot);
  return 1.0;
}

double integral_i3(const HingeFactor* fk, const HingeFactor* fl,
                   const Marginal& mu) {
  if (!fk || !fl) return 0.0;
  return fk->sign * fl->sign *
         centered_moment(mu, 0, integration_bounds(fk, fl), 0.0);
}

double integral_i4(const HingeFactor* f, const Marginal& mu) {
  if (!f) return 0.0;
  return f->sign * centered_moment(mu, 0, factor_support(*f), 0.0);
}

double integral_i5(const HingeFactor* f, const Marginal& mu) {
  if (!f) return 1.0;
  return f->sign * centered_moment(mu, 1, factor_support(*f), f->knot);
}

CoActiveMatrix cmat(const MarsSurrogate& mk, const MarsSurrogate& ml,
                    const InputPrior& prior) {
  check_pair(mk, ml, prior);
  const auto tab = build_tables(mk, ml, prior, false);
  return CoActiveMatrix::from_entries(assemble(mk, ml, tab, false), mk.label(),
                                      ml.label());
}

double cotrace(const MarsSurrogate& mk, const MarsSurrogate& ml,
               const InputPrior& prior) {
  check_pair(mk, ml, prior);
  const auto tab = build_tables(mk, ml, prior, true);
  return assemble(mk, ml, tab, true).trace();
}

Eigen::VectorXd expected_gradient(const MarsSurrogate& m,
                                  const InputPrior& prior) {
  if (m.p() != prior.p()) {
    throw DimensionError("surrogate and prior disagree on input dimension");
  }
  std::vector<Accumulator> acc(m.p());
  for (const auto& t : m.terms()) {
    const auto d = t.factors.size();
    std::vector<double> i5(d);
    for (std::size_t a = 0; a < d; ++a) {
      i5[a] = integral_i5(&t.factors[a], prior[t.factors[a].var]);
    }
    for (std::size_t a = 0; a < d; ++a) {
      const auto& f = t.factors[a];
      double prod = t.coef * integral_i4(&f, prior[f.var]);
      for (std::size_t b = 0; b < d; ++b) {
        if (b != a) prod *= i5[b];
      }
      acc[f.var].add(prod);
    }
  }
  Eigen::VectorXd z(m.p());
  for (int i = 0; i < m.p(); ++i) z(i) = acc[i].value();
  return z;
}

CoActiveMatrix cmat_modified(const MarsSurrogate& mk, const MarsSurrogate& ml,
                             const InputPrior& prior) {
  CoActiveMatrix c = cmat(mk, ml, prior);
  const Eigen::VectorXd zk = expected_gradient(mk, prior);
  const Eigen::VectorXd zl = expected_gradient(ml, prior);
  return CoActiveMatrix::from_entries(c.entries + zk * zl.transpose(),
                                      std::move(c.label_k), std::move(c.label_l),
                                      MatrixKind::modified);
}

}  // namespace coas
