#include "argprobe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "argprobe/error.hpp"

namespace argprobe::geometry {

EmbeddingMatrix embedding_matrix(const backend::ModelHandle& handle) {
  EmbeddingMatrix out;
  const auto& model = handle.model();
  const int v = model.config().vocab_size;
  const int d = model.config().d_model;
  out.rows.reserve(v);
  for (int t = 0; t < v; ++t) {
    const double* row = model.embedding_row(t);
    out.rows.emplace_back(row, row + d);
  }
  return out;
}

EmbeddingMatrix all_but_the_top(const EmbeddingMatrix& E, int d) {
  const int n = static_cast<int>(E.rows.size());
  const int dim = E.dim();
  if (n == 0) fail(ErrorKind::parameter, "empty embedding matrix");
  if (d <= 0 || d >= dim)
    fail(ErrorKind::parameter,
         "component count must lie in [1, d_model): got " + std::to_string(d));
  if (E.correction_d == d) return E;
  Eigen::MatrixXd X(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) X(i, j) = E.rows[i][j];
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  const Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    fail(ErrorKind::parameter, "eigendecomposition failed");
  // eigenvalues ascend; take the last d columns, sign-fixed so the
  // largest-magnitude entry is positive
  EmbeddingMatrix out;
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd u = solver.eigenvectors().col(dim - 1 - k);
    int arg = 0;
    for (int j = 1; j < dim; ++j)
      if (std::abs(u(j)) > std::abs(u(arg))) arg = j;
    if (u(arg) < 0) u = -u;
    X -= (X * u) * u.transpose();
    out.removed_directions.emplace_back(u.data(), u.data() + dim);
  }
  out.correction_d = d;
  out.rows.assign(n, std::vector<double>(dim));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) out.rows[i][j] = X(i, j);
  return out;
}

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<GroupProfile> cosine_profile(const EmbeddingMatrix& E,
                                         const std::vector<int>& novel_tokens,
                                         const std::vector<NounGroup>& groups) {
  std::vector<GroupProfile> out;
  for (int novel : novel_tokens) {
    if (novel < 0 || novel >= static_cast<int>(E.rows.size()))
      fail(ErrorKind::bounds, "novel token id outside the matrix");
    const auto& nv = E.rows[novel];
    const double nn = norm(nv);
    if (nn == 0.0)
      fail(ErrorKind::undefined_similarity,
           "novel token has a zero-norm embedding");
    for (const auto& g : groups) {
      if (g.members.empty())
        fail(ErrorKind::config, "noun group " + g.label + " is empty");
      GroupProfile p;
      p.group = g.label;
      p.novel = novel;
      double sum = 0.0;
      std::vector<double> defined;
      for (int m : g.members) {
        if (m < 0 || m >= static_cast<int>(E.rows.size()))
          fail(ErrorKind::bounds, "group member id outside the matrix");
        SimilarityEntry e;
        e.token = m;
        const double mn = norm(E.rows[m]);
        if (mn == 0.0) {
          e.defined = false;
        } else {
          e.similarity = dot(E.rows[m], nv) / (mn * nn);
          sum += e.similarity;
          defined.push_back(e.similarity);
        }
        p.members.push_back(e);
      }
      p.defined_count = static_cast<int>(defined.size());
      if (p.defined_count > 0) {
        p.mean = sum / p.defined_count;
        if (p.defined_count > 1) {
          double ss = 0.0;
          for (double s : defined) ss += (s - p.mean) * (s - p.mean);
          p.std_error = std::sqrt(ss / (p.defined_count - 1)) /
                        std::sqrt(static_cast<double>(p.defined_count));
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    fail(ErrorKind::correlation, "coordinate vectors differ in length");
  const int n = static_cast<int>(x.size());
  if (n < 3) fail(ErrorKind::correlation, "need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(ErrorKind::correlation, "zero variance in one coordinate");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Regularized incomplete beta via Lentz's continued fraction.
double betacf(double a, double b, double x) {
  const double eps = 3e-14, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 200; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double incbeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double correlation_p_value(double r, int n) {
  if (n < 3) fail(ErrorKind::correlation, "need at least 3 points");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = n - 2;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  // two-sided: P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
  return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

CorrelationReport baseline_correlation_probe(
    const backend::ModelHandle& tuned, const backend::ModelHandle& baseline,
    const paradigm::GeneratedDataset& probe,
    const std::vector<std::pair<NounGroup, int>>& group_novel) {
  constexpr double kFloor = -30.0;
  CorrelationReport out;
  const auto& tok = tuned.tokenizer();
  for (const auto& s : probe.sentences) {
    const auto enc = tok.encode(s.text);
    std::vector<int> positions;
    for (size_t i = 0; i < enc.ids.size(); ++i)
      if (enc.ids[i] == tok.mask_id()) positions.push_back(static_cast<int>(i));
    if (positions.empty()) continue;
    const auto dt = tuned.predict_ids(enc.ids, positions, s.id);
    const auto db = baseline.predict_ids(enc.ids, positions, s.id);
    for (size_t p = 0; p < positions.size(); ++p) {
      for (const auto& [group, novel] : group_novel) {
        const double y = std::max(dt.logprobs[p][novel], kFloor);
        for (int m : group.members) {
          const double x = std::max(db.logprobs[p][m], kFloor);
          out.points.emplace_back(x, y);
        }
      }
    }
  }
  std::vector<double> xs, ys;
  for (auto [x, y] : out.points) {
    xs.push_back(x);
    ys.push_back(y);
  }
  out.n = static_cast<int>(out.points.size());
  out.r = pearson_r(xs, ys);
  out.p_value = correlation_p_value(out.r, out.n);
  return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double pos = q * (v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

DriftAudit kl_audit(const backend::ModelHandle& tuned,
                    const backend::ModelHandle& baseline,
                    const std::vector<std::string>& sample) {
  const auto& tok = tuned.tokenizer();
  const int base = std::min(tuned.tokenizer().base_size(),
                            baseline.tokenizer().base_size());
  if (tuned.tokenizer().base_size() != baseline.tokenizer().base_size())
    fail(ErrorKind::shape, "handles disagree on the base vocabulary");
  DriftAudit audit;
  audit.sample = sample;
  const int max_pos = tuned.model().config().max_pos;
  for (const auto& s : sample) {
    auto ids = tok.encode_ids(s);
    if (static_cast<int>(ids.size()) > max_pos) ids.resize(max_pos);
    std::vector<int> all(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) all[i] = static_cast<int>(i);
    const auto pt = tuned.predict_ids(ids, all, s);
    const auto pb = baseline.predict_ids(ids, all, s);
    for (size_t p = 0; p < all.size(); ++p) {
      // restrict to the base vocabulary and renormalize
      double zt = 0.0, zb = 0.0;
      for (int j = 0; j < base; ++j) {
        zt += std::exp(pt.logprobs[p][j]);
        zb += std::exp(pb.logprobs[p][j]);
      }
      double kl = 0.0;
      for (int j = 0; j < base; ++j) {
        const double pj = std::exp(pt.logprobs[p][j]) / zt;
        const double qj = std::exp(pb.logprobs[p][j]) / zb;
        if (pj > 0.0) kl += pj * (std::log(pj) - std::log(qj));
      }
      audit.values.push_back(std::max(kl, 0.0));
    }
  }
  if (!audit.values.empty()) {
    double sum = 0.0;
    for (double v : audit.values) sum += v;
    audit.mean = sum / audit.values.size();
    audit.q25 = quantile(audit.values, 0.25);
    audit.q50 = quantile(audit.values, 0.50);
    audit.q75 = quantile(audit.values, 0.75);
  }
  return audit;
}

void write_profile_table(const std::vector<GroupProfile>& profiles,
                         const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write profile table: " + path);
  f << "group\tnovel\tmean\tstd_error\tdefined\ttotal\n";
  for (const auto& p : profiles)
    f << p.group << "\t" << p.novel << "\t" << p.mean << "\t" << p.std_error
      << "\t" << p.defined_count << "\t" << p.members.size() << "\n";
}

namespace {

struct Scale {
  double lo, hi;
  double map(double v, double px0, double px1) const {
    if (hi == lo) return (px0 + px1) / 2;
    return px0 + (v - lo) / (hi - lo) * (px1 - px0);
  }
};

Scale scale_of(const std::vector<double>& v) {
  Scale s{0.0, 1.0};
  if (!v.empty()) {
    s.lo = *std::min_element(v.begin(), v.end());
    s.hi = *std::max_element(v.begin(), v.end());
    const double pad = (s.hi - s.lo) * 0.05 + 1e-9;
    s.lo -= pad;
    s.hi += pad;
  }
  return s;
}

}  // namespace

void write_scatter_svg(const CorrelationReport& report,
                       const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write plot: " + path);
  std::vector<double> all;
  for (auto [x, y] : report.points) {
    all.push_back(x);
    all.push_back(y);
  }
  const Scale s = scale_of(all);
  const double w = 420, h = 420, m = 30;
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h << "'>\n";
  f << "<rect width='100%' height='100%' fill='white'/>\n";
  // identity diagonal
  f << "<line x1='" << m << "' y1='" << h - m << "' x2='" << w - m << "' y2='"
    << m << "' stroke='gray' stroke-dasharray='4'/>\n";
  for (auto [x, y] : report.points) {
    const double px = s.map(x, m, w - m);
    const double py = h - s.map(y, m, h - m);
    f << "<circle cx='" << px << "' cy='" << py
      << "' r='2.5' fill='steelblue' fill-opacity='0.6'/>\n";
  }
  f << "<text x='" << m << "' y='" << m - 10 << "' font-size='12'>r="
    << report.r << " p=" << report.p_value << " n=" << report.n
    << "</text>\n</svg>\n";
}

void write_strip_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write plot: " + path);
  std::vector<double> all;
  for (const auto& [name, vs] : series)
    all.insert(all.end(), vs.begin(), vs.end());
  const Scale s = scale_of(all);
  const double w = 520, row = 40, m = 110;
  const double h = row * series.size() + 40;
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const double cy = 30 + row * i;
    f << "<text x='5' y='" << cy + 4 << "' font-size='12'>" << series[i].first
      << "</text>\n";
    for (double v : series[i].second) {
      const double px = s.map(v, m, w - 20);
      f << "<circle cx='" << px << "' cy='" << cy
        << "' r='2.5' fill='darkorange' fill-opacity='0.5'/>\n";
    }
  }
  f << "</svg>\n";
}

}  // namespace argprobe::geometry
