#include "jpool/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "jpool/numeric.hpp"

namespace jpool {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BigInt binom(std::size_t a, std::size_t b) {
  if (b > a) return 0;
  b = std::min(b, a - b);
  BigInt r = 1;
  for (std::size_t i = 1; i <= b; ++i) {
    r *= static_cast<unsigned>(a - b + i);
    r /= static_cast<unsigned>(i);
  }
  return r;
}

std::string describe(const std::vector<double>& v) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

}  // namespace

std::vector<std::vector<BigInt>> tuple_system_coeffs(std::size_t n,
                                                        std::size_t k) {
  require(k >= 1, Errc::invalid_argument, "tuple counts: k must be >= 1");
  require(n > k, Errc::invalid_argument, "tuple counts: need n > k");
  require(n <= 64, Errc::domain_violation, "tuple counts: n capped at 64");
  std::vector<std::vector<BigInt>> m(k, std::vector<BigInt>(n));
  // Index i at slot j leaves j-1 smaller slots to fill from the i-1 earlier
  // indices and k-j larger ones from the n-i later indices.
  for (std::size_t j = 1; j <= k; ++j)
    for (std::size_t i = 1; i <= n; ++i)
      m[j - 1][i - 1] = binom(i - 1, j - 1) * binom(n - i, k - j);
  return m;
}

std::vector<BigInt> collision_direction(std::size_t n, std::size_t k) {
  const auto counts = tuple_system_coeffs(n, k);
  std::vector<std::vector<Rational>> m(k, std::vector<Rational>(n));
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < n; ++c) m[r][c] = Rational(counts[r][c]);

  // Exact reduced row echelon form.
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t c = 0; c < n && row < k; ++c) {
    std::size_t p = row;
    while (p < k && m[p][c] == 0) ++p;
    if (p == k) continue;
    std::swap(m[p], m[row]);
    const Rational piv = m[row][c];
    for (std::size_t j = 0; j < n; ++j) m[row][j] /= piv;
    for (std::size_t q = 0; q < k; ++q) {
      if (q == row || m[q][c] == 0) continue;
      const Rational f = m[q][c];
      for (std::size_t j = 0; j < n; ++j) m[q][j] -= f * m[row][j];
    }
    pivot_cols.push_back(c);
    ++row;
  }
  require(row == k, Errc::internal, "tuple system lost rank");

  std::vector<char> is_pivot(n, 0);
  for (std::size_t c : pivot_cols) is_pivot[c] = 1;
  std::size_t free_col = n;
  for (std::size_t c = n; c-- > 0;)
    if (!is_pivot[c]) {
      free_col = c;
      break;
    }
  require(free_col < n, Errc::internal, "tuple system has no free column");

  std::vector<Rational> x(n, Rational(0));
  x[free_col] = 1;
  for (std::size_t r = 0; r < k; ++r) x[pivot_cols[r]] = -m[r][free_col];

  BigInt lcm_den = 1;
  for (const Rational& v : x)
    lcm_den = boost::multiprecision::lcm(lcm_den,
                                         boost::multiprecision::denominator(v));
  std::vector<BigInt> out(n);
  BigInt g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = boost::multiprecision::numerator(x[i]) *
             (lcm_den / boost::multiprecision::denominator(x[i]));
    g = boost::multiprecision::gcd(g, boost::multiprecision::abs(out[i]));
  }
  if (g > 1)
    for (BigInt& v : out) v /= g;
  for (const BigInt& v : out) {
    if (v == 0) continue;
    if (v < 0)
      for (BigInt& u : out) u = -u;
    break;
  }

  for (std::size_t r = 0; r < k; ++r) {
    BigInt acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += counts[r][i] * out[i];
    require(acc == 0, Errc::internal, "null direction failed exact re-check");
  }
  return out;
}

std::vector<double> collision_delta(std::size_t n, std::size_t k,
                                    double radius) {
  require(std::isfinite(radius) && radius > 0.0, Errc::invalid_argument,
          "collision_delta: radius must be positive");
  const auto dir = collision_direction(n, k);
  BigInt maxabs = 0;
  for (const BigInt& v : dir) {
    BigInt a = v < 0 ? BigInt(-v) : v;
    if (a > maxabs) maxabs = std::move(a);
  }
  require(maxabs > 0, Errc::internal, "collision_delta: zero direction");
  const double m = maxabs.convert_to<double>();
  require(m < 9.0e15, Errc::domain_violation,
          "collision_delta: direction too large for exact float embedding");

  // Largest power of two s with maxabs*s <= radius/2; every entry of the
  // direction times s is then exact in doubles.
  const double target = radius / (2.0 * m);
  require(target > 0.0 && std::isfinite(target), Errc::degenerate_input,
          "collision_delta: radius too small");
  int e = 0;
  std::frexp(target, &e);
  const double s = std::ldexp(1.0, e - 1);
  require(s > 0.0, Errc::degenerate_input,
          "collision_delta: scale underflowed");

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = dir[i].convert_to<double>() * s;
  return out;
}

NestedCheckResult check_nested(const ExplicitPartition& cells,
                               std::span<const double> w, std::size_t arity) {
  const std::size_t k = arity, n = w.size();
  require(k >= 1, Errc::invalid_argument, "check_nested: arity must be >= 1");
  require(cells.input_dim() == k, Errc::dimension_mismatch,
          "check_nested: partition dimension != arity");
  require(n >= k, Errc::invalid_argument, "check_nested: too few points");

  std::vector<double> cellmin(cells.num_cells(), kInf);
  std::vector<double> z(k);
  pooling::for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
    for (std::size_t j = 0; j < k; ++j) z[j] = w[idx[j]];
    for (std::size_t c = 0; c < cells.num_cells(); ++c)
      cellmin[c] = std::min(cellmin[c], cells.cell(c).margin(z));
  });

  NestedCheckResult res;
  for (std::size_t c = 0; c < cells.num_cells(); ++c) {
    if (cellmin[c] > kStrictInteriorTol) {
      res.host_cells.push_back(c);
      res.min_margin = std::max(res.min_margin, cellmin[c]);
    }
  }
  res.ok = !res.host_cells.empty();
  std::ostringstream os;
  if (res.ok)
    os << res.host_cells.size() << " host cell(s), best margin "
       << res.min_margin;
  else
    os << "no cell strictly contains every tuple";
  res.detail = os.str();
  return res;
}

RegionNestedResult check_nested_region(const CpwlFunction& f,
                                       std::span<const double> w,
                                       std::size_t arity) {
  const std::size_t k = arity, n = w.size();
  require(k >= 1, Errc::invalid_argument,
          "check_nested_region: arity must be >= 1");
  require(f.input_dim() == k, Errc::dimension_mismatch,
          "check_nested_region: function dimension != arity");
  require(n >= k, Errc::invalid_argument, "check_nested_region: too few points");

  RegionNestedResult res;
  res.min_stability = kInf;
  bool first = true;
  bool failed = false;
  std::vector<double> z(k);
  pooling::for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
    if (failed) return;
    for (std::size_t j = 0; j < k; ++j) z[j] = w[idx[j]];
    RegionId id = f.region_id(z);
    if (first) {
      res.region = std::move(id);
      first = false;
    } else if (id != res.region) {
      res.detail = "tuple " + describe(z) + " lies in a different region";
      failed = true;
      return;
    }
    const StabilityRadius s = f.stability_radius(z);
    if (s.on_boundary || !(s.value > 0.0)) {
      res.detail = "tuple " + describe(z) + " sits on a region boundary";
      failed = true;
      return;
    }
    res.min_stability = std::min(res.min_stability, s.value);
  });
  res.ok = !failed;
  if (res.ok && res.detail.empty()) {
    std::ostringstream os;
    os << "all tuples share one region, min stability " << res.min_stability;
    res.detail = os.str();
  }
  return res;
}

NestedPointCertificate nested_point(const CpwlFunction& region_source,
                                         std::size_t count,
                                         double seed_point) {
  const std::size_t k = region_source.input_dim();
  require(k >= 1, Errc::invalid_argument, "nested_point: empty input");
  require(count > k, Errc::invalid_argument,
          "nested_point: need count > arity");
  require(seed_point > 0.0 && seed_point < 1.0, Errc::invalid_argument,
          "nested_point: seed must lie in (0,1)");

  NestedPointCertificate cert;
  cert.base = seed_point;
  std::vector<double> v(k, seed_point);
  cert.v_chain.push_back(v);

  for (std::size_t i = 0; i < k; ++i) {
    double e = region_source.region_clearance_l1(v);
    for (std::size_t t = 0; t < k; ++t)
      e = std::min({e, v[t], 1.0 - v[t]});  // stay inside the open unit box
    if (i > 0) e = std::min(e, cert.eps[i - 1] / 2.0);
    require(e > 1e-13, Errc::degenerate_input,
            "nested_point: safe radius collapsed at the seed");
    cert.eps.push_back(e);
    v[i] += e / 2.0;
    cert.v_chain.push_back(v);
  }

  if (k == 1) {
    cert.ratio = 0.5;
  } else {
    cert.ratio = kInf;
    for (std::size_t i = 1; i < k; ++i)
      cert.ratio = std::min(cert.ratio, cert.eps[i] / cert.eps[i - 1]);
  }

  double y = cert.eps[0] / 4.0;
  for (std::size_t i = 0; i < count; ++i) {
    cert.offsets.push_back(y);
    cert.w.push_back(seed_point + y);
    y *= cert.ratio;
  }
  require(cert.offsets.back() > 0.0, Errc::degenerate_input,
          "nested_point: offsets underflowed");

  cert.region = region_source.region_id(cert.v_chain.back());
  const RegionNestedResult chk =
      check_nested_region(region_source, cert.w, k);
  require(chk.ok, Errc::degenerate_input,
          "nested_point: " + chk.detail);
  require(chk.region == cert.region, Errc::degenerate_input,
          "nested_point: tuples landed outside the chain's region");
  return cert;
}

VerificationReport validate_nested(const CpwlFunction& region_source,
                                   const NestedPointCertificate& cert) {
  VerificationReport rep;
  const std::size_t k = cert.eps.size();
  const std::size_t n = cert.w.size();

  const bool shape_ok = k >= 1 && cert.v_chain.size() == k + 1 && n > k &&
                        cert.offsets.size() == n &&
                        region_source.input_dim() == k;
  rep.add("shape", shape_ok);
  if (!shape_ok) return rep;

  rep.add("base_interior", cert.base > 0.0 && cert.base < 1.0);

  bool v0_ok = cert.v_chain[0].size() == k;
  for (std::size_t t = 0; v0_ok && t < k; ++t)
    v0_ok = cert.v_chain[0][t] == cert.base;
  rep.add("chain_start", v0_ok);

  bool eps_ok = true;
  for (std::size_t i = 0; i < k && eps_ok; ++i) {
    eps_ok = cert.eps[i] > 0.0;
    if (i > 0) eps_ok = eps_ok && cert.eps[i] <= cert.eps[i - 1] / 2.0 * (1.0 + 1e-12);
  }
  rep.add("radii_halving", eps_ok);

  bool rec_ok = true;
  for (std::size_t i = 1; i <= k && rec_ok; ++i) {
    if (cert.v_chain[i].size() != k) {
      rec_ok = false;
      break;
    }
    for (std::size_t t = 0; t < k; ++t) {
      const double expect = cert.v_chain[i - 1][t] +
                            (t == i - 1 ? cert.eps[i - 1] / 2.0 : 0.0);
      if (std::fabs(cert.v_chain[i][t] - expect) > 1e-14) {
        rec_ok = false;
        break;
      }
    }
  }
  rep.add("anchor_recurrence", rec_ok);

  bool ratio_ok = cert.ratio > 0.0 && cert.ratio <= 0.5 + 1e-15;
  if (k >= 2 && ratio_ok) {
    double rho = kInf;
    for (std::size_t i = 1; i < k; ++i)
      rho = std::min(rho, cert.eps[i] / cert.eps[i - 1]);
    ratio_ok = std::fabs(cert.ratio - rho) <= 1e-15 * (1.0 + rho);
  }
  rep.add("decay_ratio", ratio_ok);

  bool off_ok = cert.offsets[0] > 0.0 &&
                std::fabs(cert.offsets[0] - cert.eps[0] / 4.0) <=
                    1e-15 * cert.eps[0];
  for (std::size_t i = 1; i < n && off_ok; ++i) {
    off_ok = cert.offsets[i] > 0.0 &&
             cert.offsets[i] < cert.offsets[i - 1] &&
             std::fabs(cert.offsets[i] - cert.offsets[i - 1] * cert.ratio) <=
                 1e-12 * cert.offsets[i - 1];
  }
  rep.add("offset_decay", off_ok);

  bool w_ok = true;
  for (std::size_t i = 0; i < n && w_ok; ++i) {
    w_ok = std::fabs(cert.w[i] - (cert.base + cert.offsets[i])) <= 1e-14 &&
           cert.w[i] > 0.0 && cert.w[i] < 1.0;
    if (i > 0) w_ok = w_ok && cert.w[i] < cert.w[i - 1];
  }
  rep.add("points_ordered", w_ok);

  // Convex weights tying the leading tuple back to the chain anchors.
  {
    std::vector<double> alpha(k + 1, 0.0);
    alpha[0] = 1.0 - 2.0 * cert.offsets[0] / cert.eps[0];
    for (std::size_t i = 1; i < k; ++i)
      alpha[i] = 2.0 * cert.offsets[i - 1] / cert.eps[i - 1] -
                 2.0 * cert.offsets[i] / cert.eps[i];
    alpha[k] = 2.0 * cert.offsets[k - 1] / cert.eps[k - 1];

    bool nonneg = true;
    double sum = 0.0;
    for (double a : alpha) {
      nonneg = nonneg && a >= -1e-12;
      sum += a;
    }
    rep.add("weights_nonnegative", nonneg);
    rep.add("weights_sum_to_one", std::fabs(sum - 1.0) <= 1e-12);

    KahanSum combo(k);
    for (std::size_t i = 0; i <= k; ++i)
      combo.add_scaled(cert.v_chain[i], alpha[i]);
    double err = 0.0;
    for (std::size_t t = 0; t < k; ++t)
      err = std::max(err,
                     std::fabs(combo.value()[t] - (cert.base + cert.offsets[t])));
    std::ostringstream os;
    os << "reconstruction error " << err;
    rep.add("weights_reconstruct_tuple", err <= 1e-12, os.str());
  }

  // Covers shrink (or persist) along the chain.
  {
    bool chain_ok = true;
    RegionCover prev = region_source.region_cover(cert.v_chain[0]);
    for (std::size_t i = 1; i <= k && chain_ok; ++i) {
      RegionCover cur = region_source.region_cover(cert.v_chain[i]);
      chain_ok = RegionCover::subset(cur, prev);
      prev = std::move(cur);
    }
    rep.add("cover_chain", chain_ok);
  }

  rep.add("region_matches_chain",
          region_source.region_id(cert.v_chain.back()) == cert.region);

  const RegionNestedResult chk =
      check_nested_region(region_source, cert.w, k);
  rep.add("tuples_share_region", chk.ok && chk.region == cert.region,
          chk.detail);
  return rep;
}

namespace {

AffineMap lift_map(std::size_t arity, const Point& alpha, const Point& beta) {
  const std::size_t d = alpha.size();
  AffineMap m(arity * d, arity);
  for (std::size_t j = 0; j < arity; ++j)
    for (std::size_t t = 0; t < d; ++t) {
      m.at(j * d + t, j) = beta[t] - alpha[t];
      m.bias[j * d + t] = alpha[t];
    }
  return m;
}

// The function the pooling actually runs over scalar points: f itself, or f
// pulled back through the segment embedding.
std::shared_ptr<const CpwlFunction> scalar_form(
    std::shared_ptr<const CpwlFunction> f, const CollisionCertificate& cert) {
  if (!cert.has_lift) return f;
  return std::make_shared<AffinePrecompose>(
      std::move(f), lift_map(cert.arity, cert.lift_alpha, cert.lift_beta));
}

}  // namespace

std::pair<Multiset, Multiset> collision_multisets(
    const CollisionCertificate& cert) {
  const std::size_t n = cert.count, d = cert.point_dim;
  require(cert.nested.w.size() == n && cert.delta.size() == n,
          Errc::invalid_argument, "collision_multisets: malformed certificate");
  auto embed = [&](double t) {
    if (!cert.has_lift) return Point{t};
    Point p(d);
    for (std::size_t c = 0; c < d; ++c)
      p[c] = cert.lift_alpha[c] + (cert.lift_beta[c] - cert.lift_alpha[c]) * t;
    return p;
  };
  std::vector<Point> a, b;
  a.reserve(n);
  b.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(embed(cert.nested.w[i]));
    b.push_back(embed(cert.nested.w[i] + cert.delta[i]));
  }
  return {Multiset(d, std::move(a)), Multiset(d, std::move(b))};
}

VerificationReport verify_collision(std::shared_ptr<const CpwlFunction> f,
                                    const CollisionCertificate& cert,
                                    const WitnessOptions& opts) {
  VerificationReport rep;
  require(f != nullptr, Errc::invalid_argument, "verify: null function");

  const std::size_t k = cert.arity, n = cert.count, d = cert.point_dim;
  const bool shape_ok =
      k >= 1 && n > k && d >= 1 && cert.nested.w.size() == n &&
      cert.delta.size() == n && cert.nested.eps.size() == k &&
      cert.pooled_base.size() == f->output_dim() &&
      cert.pooled_perturbed.size() == f->output_dim() &&
      (cert.has_lift
           ? (cert.lift_alpha.size() == d && cert.lift_beta.size() == d &&
              f->input_dim() == k * d &&
              cert.lift_alpha != cert.lift_beta)
           : (d == 1 && f->input_dim() == k));
  rep.add("shape", shape_ok);
  if (!shape_ok) return rep;

  const std::shared_ptr<const CpwlFunction> h = scalar_form(f, cert);
  const auto fhat = symmetrize(h, k);

  {
    VerificationReport nested = validate_nested(*fhat, cert.nested);
    for (auto& item : nested.items)
      rep.add("nested." + item.name, item.pass, std::move(item.detail));
  }

  const auto counts = tuple_system_coeffs(n, k);

  {  // Exact residual of the tuple-count system against delta.
    bool zero = true;
    for (std::size_t j = 0; j < k && zero; ++j) {
      Rational acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        acc += Rational(counts[j][i]) * to_rational(cert.delta[i]);
      zero = acc == 0;
    }
    rep.add("delta_null_exact", zero);
  }

  {  // Same residual in plain double arithmetic.
    double worst = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double mji = counts[j][i].convert_to<double>();
        acc += mji * cert.delta[i];
        mag += std::fabs(mji * cert.delta[i]);
      }
      worst = std::max(worst, std::fabs(acc));
      scale = std::max(scale, mag);
    }
    std::ostringstream os;
    os << "residual " << worst;
    rep.add("delta_null_float", worst <= 1e-12 * (1.0 + scale), os.str());
  }

  const double gap_scalar = linf_norm(cert.delta);
  rep.add("delta_within_budget",
          gap_scalar > 0.0 && gap_scalar <= cert.radius / 2.0 * (1.0 + 1e-12));

  std::vector<double> wd(n);
  for (std::size_t i = 0; i < n; ++i)
    wd[i] = cert.nested.w[i] + cert.delta[i];

  {
    bool ordered = true;
    for (std::size_t i = 1; i < n; ++i) ordered = ordered && wd[i] < wd[i - 1];
    rep.add("perturbed_order", ordered);
  }

  {
    const RegionNestedResult base_chk = check_nested_region(*fhat, cert.nested.w, k);
    const RegionNestedResult pert_chk = check_nested_region(*fhat, wd, k);
    rep.add("tuples_share_region",
            base_chk.ok && base_chk.region == cert.nested.region,
            base_chk.detail);
    rep.add("perturbed_tuples_share_region",
            pert_chk.ok && pert_chk.region == cert.nested.region,
            pert_chk.detail);
    rep.add("radius_within_stability",
            base_chk.ok && cert.radius <= base_chk.min_stability * (1.0 + 1e-12));
  }

  // Independent re-evaluation: full S_n enumeration while tractable, the
  // ascending form beyond that.
  const auto repool = [](const PoolingSpec& spec, const std::vector<double>& x) {
    return spec.count <= 7 ? janossy_pool_permutations(spec, x)
                           : janossy_pool(spec, x);
  };
  PoolingSpec ps{k, n, 1, h};
  const std::vector<double> pooled_w = repool(ps, cert.nested.w);
  const std::vector<double> pooled_wd = repool(ps, wd);
  const double scale =
      1.0 + std::max(linf_norm(pooled_w), linf_norm(pooled_wd));

  rep.add("pooled_match_stored",
          linf_diff(pooled_w, cert.pooled_base) <= opts.tol * scale &&
              linf_diff(pooled_wd, cert.pooled_perturbed) <= opts.tol * scale);

  rep.pooled_residual = linf_diff(pooled_w, pooled_wd);
  {
    std::ostringstream os;
    os << "residual " << rep.pooled_residual << " (scale " << scale << ")";
    rep.add("pooled_equal", rep.pooled_residual <= opts.tol * scale, os.str());
  }

  {
    const auto [ma, mb] = collision_multisets(cert);
    const Multiset ca = ma.canonicalized(), cb = mb.canonicalized();
    double gap = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i)
      gap = std::max(gap, linf_dist(ca[i], cb[i]));
    rep.multiset_gap = gap;
    std::ostringstream os;
    os << "canonical gap " << gap;
    rep.add("multisets_differ", gap > 0.0 && ca != cb, os.str());
  }

  if (cert.has_lift) {
    // Pool f directly over the embedded point sets; must agree with the
    // scalar-side pooling.
    const auto [ma, mb] = collision_multisets(cert);
    PoolingSpec direct{k, n, d, f};
    const auto da = repool(direct, ma.flat());
    const auto db = repool(direct, mb.flat());
    rep.add("lift_consistent",
            linf_diff(da, pooled_w) <= opts.tol * scale &&
                linf_diff(db, pooled_wd) <= opts.tol * scale);
  }

  if (opts.exact) {
    std::vector<Rational> rw(n), rwd(n);
    for (std::size_t i = 0; i < n; ++i) {
      rw[i] = to_rational(cert.nested.w[i]);
      rwd[i] = to_rational(wd[i]);
    }
    const auto ea = janossy_pool_exact(ps, rw);
    const auto eb = janossy_pool_exact(ps, rwd);
    bool equal = true;
    for (std::size_t i = 0; i < ea.size() && equal; ++i) equal = ea[i] == eb[i];
    rep.add("exact_pooled_equal", equal);
  }

  return rep;
}

namespace {

CollisionCertificate search_collision(std::shared_ptr<const CpwlFunction> f,
                                      std::size_t arity, std::size_t count,
                                      const WitnessOptions& opts) {
  const std::size_t k = arity, n = count;
  require(f != nullptr, Errc::invalid_argument, "find_collision: null function");
  require(k >= 1, Errc::invalid_argument, "find_collision: arity must be >= 1");
  require(n > k, Errc::invalid_argument, "find_collision: need count > arity");
  require(f->input_dim() == k, Errc::dimension_mismatch,
          "find_collision: function must consume arity coordinates");

  const auto fhat = symmetrize(f, k);
  CounterRng rng(opts.seed, /*stream=*/11);

  std::optional<CollisionCertificate> best;
  double best_gap = 0.0;
  std::string last = "no attempts made";

  const int attempts = std::max(1, opts.max_attempts);
  for (int a = 0; a < attempts; ++a) {
    const double x0 = a == 0 ? opts.seed_point : rng.uniform(0.05, 0.95);

    CollisionCertificate cert;
    cert.arity = k;
    cert.count = n;
    cert.point_dim = 1;
    try {
      cert.nested = nested_point(*fhat, n, x0);
    } catch (const Error& e) {
      last = e.what();
      continue;
    }

    const RegionNestedResult chk = check_nested_region(*fhat, cert.nested.w, k);
    if (!chk.ok) {
      last = chk.detail;
      continue;
    }

    double min_gap_w = kInf;
    for (std::size_t i = 1; i < n; ++i)
      min_gap_w = std::min(min_gap_w, cert.nested.w[i - 1] - cert.nested.w[i]);
    const double border =
        std::min(cert.nested.w.back(), 1.0 - cert.nested.w.front());
    const double radius = std::min(
        {chk.min_stability / 2.0, 0.495 * min_gap_w, 0.5 * border});
    if (!(radius > 1e-300)) {
      last = "perturbation budget collapsed";
      continue;
    }
    cert.radius = radius;

    try {
      cert.delta = collision_delta(n, k, radius);
    } catch (const Error& e) {
      last = e.what();
      continue;
    }

    PoolingSpec ps{k, n, 1, f};
    cert.pooled_base = janossy_pool(ps, cert.nested.w);
    std::vector<double> wd(n);
    for (std::size_t i = 0; i < n; ++i)
      wd[i] = cert.nested.w[i] + cert.delta[i];
    cert.pooled_perturbed = janossy_pool(ps, wd);

    const VerificationReport rep = verify_collision(f, cert, opts);
    if (!rep.ok()) {
      for (const auto& item : rep.items)
        if (!item.pass) {
          last = "check '" + item.name + "' failed " +
                 (item.detail.empty() ? "" : "(" + item.detail + ")");
          break;
        }
      continue;
    }

    const double gap = linf_norm(cert.delta);
    if (gap >= opts.min_gap) return cert;
    if (gap > best_gap) {
      best_gap = gap;
      best = std::move(cert);
    }
    last = "gap below requested minimum";
  }

  if (best) return *std::move(best);
  raise(Errc::verification_failure, "collision search failed: " + last);
}

}  // namespace

CollisionCertificate find_collision(std::shared_ptr<const CpwlFunction> f,
                                    std::size_t arity, std::size_t count,
                                    const WitnessOptions& opts) {
  return search_collision(std::move(f), arity, count, opts);
}

CollisionCertificate find_lifted_collision(
    std::shared_ptr<const CpwlFunction> f, std::size_t arity,
    std::size_t count, const Point& alpha, const Point& beta,
    const WitnessOptions& opts) {
  require(f != nullptr, Errc::invalid_argument, "find_collision: null function");
  const std::size_t d = alpha.size();
  require(d >= 1 && beta.size() == d, Errc::dimension_mismatch,
          "lifted collision: endpoint dimensions differ");
  require(alpha != beta, Errc::invalid_argument,
          "lifted collision: segment endpoints coincide");
  require(f->input_dim() == arity * d, Errc::dimension_mismatch,
          "lifted collision: function must consume arity*dim coordinates");

  double span = 0.0;
  for (std::size_t t = 0; t < d; ++t)
    span = std::max(span, std::fabs(beta[t] - alpha[t]));

  auto h = std::make_shared<AffinePrecompose>(f, lift_map(arity, alpha, beta));
  WitnessOptions inner = opts;
  inner.min_gap = span > 0.0 ? opts.min_gap / span : opts.min_gap;

  CollisionCertificate cert = search_collision(h, arity, count, inner);
  cert.point_dim = d;
  cert.has_lift = true;
  cert.lift_alpha = alpha;
  cert.lift_beta = beta;

  const VerificationReport rep = verify_collision(f, cert, opts);
  if (!rep.ok())
    raise(Errc::verification_failure,
          "lifted collision failed final verification");
  return cert;
}

}  // namespace jpool
