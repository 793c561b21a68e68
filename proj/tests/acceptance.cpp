// End-to-end acceptance harness: twelve independent checks, one line each.
// Exit code 0 only when every check passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "jpool/cpwl.hpp"
#include "jpool/grid_codec.hpp"
#include "jpool/io.hpp"
#include "jpool/janossy.hpp"
#include "jpool/multiset.hpp"
#include "jpool/numeric.hpp"
#include "jpool/rng.hpp"
#include "jpool/witness.hpp"

using namespace jpool;

namespace {

int g_failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %02d %-34s %s\n", pass ? "PASS" : "FAIL", id, title,
              detail.c_str());
  if (!pass) ++g_failures;
}

// --- 01: nested anchors on the four-square partition ----------------------

void criterion_01() {
  const ExplicitPartition p = fixtures::four_square();
  const auto accept = check_nested(p, std::vector<double>{0.375, 0.25, 0.125}, 2);
  const auto reject = check_nested(p, std::vector<double>{0.875, 0.75, 0.125}, 2);
  std::ostringstream os;
  os << "accept(3/8,2/8,1/8)=" << (accept.ok ? "yes" : "no")
     << " reject(7/8,6/8,1/8)=" << (reject.ok ? "no" : "yes");
  report(1, "four-square nested anchors", accept.ok && !reject.ok, os.str());
}

// --- 02: nested chains on random grid partitions ---------------------------

void criterion_02() {
  CounterRng rng(10101);
  std::size_t done = 0;
  std::string why;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + trial % 3;
    const std::size_t res = 2 + static_cast<std::size_t>(trial / 3) % 7;
    const std::size_t n = k + 1 + trial % 4;
    const ExplicitPartition p = random_grid_partition(k, res, 1, rng);

    bool ok = false;
    for (int attempt = 0; attempt < 24 && !ok; ++attempt) {
      const double seed = rng.uniform(0.05, 0.95);
      try {
        const NestedPointCertificate cert = nested_point(p, n, seed);
        const auto rep = validate_nested(p, cert);
        const auto chk = check_nested(p, cert.w, k);
        ok = rep.ok() && chk.ok && chk.min_margin > 0.0;
        if (!ok) {
          for (const auto& item : rep.items)
            if (!item.pass) why = "trial " + std::to_string(trial) + ": " + item.name;
        }
      } catch (const Error&) {
        // boundary seed; try another
      }
    }
    if (!ok) {
      if (why.empty()) why = "trial " + std::to_string(trial) + ": no chain found";
      break;
    }
    ++done;
  }
  std::ostringstream os;
  os << done << "/50 partitions (k<=3, res 2-8, n<=k+4), alpha checks at 1e-12";
  if (!why.empty()) os << "; " << why;
  report(2, "nested chains on grid partitions", done == 50, os.str());
}

// --- 03: collision certificates on random relu nets ------------------------

void criterion_03() {
  CounterRng rng(30303);
  std::size_t done = 0;
  std::string why;
  for (int trial = 0; trial < 100 && why.empty(); ++trial) {
    const std::size_t k = 1 + trial % 3;
    const std::size_t n = k + 1 + rng.next_below(6 - k);  // k+1 .. 6
    const std::size_t depth = 1 + rng.next_below(3);
    std::vector<std::size_t> widths(depth);
    for (auto& w : widths) w = 2 + rng.next_below(7);  // <= 8
    auto net = std::make_shared<ReluNet>(
        ReluNet::random(k, widths, 1, rng));

    WitnessOptions opts;
    opts.seed = rng.next_u64();
    opts.max_attempts = 48;
    try {
      const CollisionCertificate cert = find_collision(net, k, n, opts);
      const auto rep = verify_collision(net, cert, opts);

      auto [a, b] = collision_multisets(cert);
      const double gap =
          linf_diff(a.canonicalized().flat(), b.canonicalized().flat());
      const double scale = 1.0 + linf_norm(cert.pooled_base);

      PoolingSpec spec{k, n, 1, net};
      const auto ref_a = janossy_pool_permutations(spec, a.flat());
      const auto ref_b = janossy_pool_permutations(spec, b.flat());
      const double brute_residual = linf_diff(ref_a, ref_b);

      if (!rep.ok())
        why = "trial " + std::to_string(trial) + ": verification failed";
      else if (rep.pooled_residual > 1e-9 * scale)
        why = "trial " + std::to_string(trial) + ": residual too large";
      else if (gap < 1e-6)
        why = "trial " + std::to_string(trial) + ": multiset gap below 1e-6";
      else if (brute_residual > 1e-9 * scale)
        why = "trial " + std::to_string(trial) + ": S_n brute force disagrees";
      else
        ++done;
    } catch (const Error& e) {
      why = "trial " + std::to_string(trial) + ": " + e.what();
    }
  }
  std::ostringstream os;
  os << done << "/100 nets (widths<=8, depth<=3, n<=6), residual<=1e-9*scale, "
        "gap>=1e-6, S_n confirmed";
  if (!why.empty()) os << "; " << why;
  report(3, "relu collision certificates", done == 100, os.str());
}

// --- 04: exact arithmetic collisions ---------------------------------------

void criterion_04() {
  CounterRng rng(40404);
  std::size_t done = 0;
  std::string why;
  for (int trial = 0; trial < 10 && why.empty(); ++trial) {
    const std::size_t k = 1 + trial % 2;
    const std::size_t n = k + 2;
    auto p = std::make_shared<ExplicitPartition>(
        random_grid_partition(k, 2 + trial % 4, 1, rng));

    WitnessOptions opts;
    opts.exact = true;
    opts.seed = rng.next_u64();
    opts.max_attempts = 48;
    try {
      const CollisionCertificate cert = find_collision(p, k, n, opts);
      const auto rep = verify_collision(p, cert, opts);
      if (!rep.ok()) {
        why = "trial " + std::to_string(trial) + ": verification failed";
        break;
      }

      // Pooled difference in exact rationals must vanish identically.
      auto [a, b] = collision_multisets(cert);
      PoolingSpec spec{k, n, 1, p};
      std::vector<Rational> ra, rb;
      for (double v : a.flat()) ra.push_back(to_rational(v));
      for (double v : b.flat()) rb.push_back(to_rational(v));
      const auto ea = janossy_pool_exact(spec, ra);
      const auto eb = janossy_pool_exact(spec, rb);
      bool zero = ea.size() == eb.size();
      for (std::size_t i = 0; zero && i < ea.size(); ++i)
        zero = ea[i] == eb[i];

      // Tuple-system residual in exact rationals, and bitwise in floats.
      const auto m = tuple_system_coeffs(n, k);
      bool null_ok = true;
      double float_residual = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        Rational dot = 0;
        double fdot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          dot += Rational(m[j][i]) * to_rational(cert.delta[i]);
          fdot += m[j][i].convert_to<double>() * cert.delta[i];
        }
        null_ok = null_ok && dot == 0;
        float_residual = std::max(float_residual, std::fabs(fdot));
      }

      if (!zero)
        why = "trial " + std::to_string(trial) + ": rational pooled diff nonzero";
      else if (!null_ok)
        why = "trial " + std::to_string(trial) + ": rational tuple residual nonzero";
      else if (float_residual != 0.0)
        why = "trial " + std::to_string(trial) + ": float tuple residual nonzero";
      else
        ++done;
    } catch (const Error& e) {
      why = "trial " + std::to_string(trial) + ": " + e.what();
    }
  }
  std::ostringstream os;
  os << done << "/10 partition collisions with exactly-zero rational residuals";
  if (!why.empty()) os << "; " << why;
  report(4, "exact-arithmetic collisions", done == 10, os.str());
}

// --- 05: tuple system coefficients ------------------------------------------

void criterion_05() {
  bool ok = true;
  std::string why;
  for (std::size_t n = 1; n <= 10 && ok; ++n) {
    for (std::size_t k = 1; k < n && k <= 4 && ok; ++k) {
      const auto fast = tuple_system_coeffs(n, k);
      std::vector<std::vector<BigInt>> slow(k, std::vector<BigInt>(n, 0));
      pooling::for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
        for (std::size_t j = 0; j < k; ++j) slow[j][idx[j]] += 1;
      });
      if (fast != slow) {
        ok = false;
        why = "mismatch at n=" + std::to_string(n) + " k=" + std::to_string(k);
        break;
      }
      // Every row sums to C(n,k).
      BigInt choose = 1;
      for (std::size_t i = 0; i < k; ++i)
        choose = choose * BigInt(n - i) / BigInt(i + 1);
      for (std::size_t j = 0; j < k; ++j) {
        BigInt sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += fast[j][i];
        if (sum != choose) {
          ok = false;
          why = "row sum at n=" + std::to_string(n) + " k=" + std::to_string(k);
        }
      }
    }
  }
  std::ostringstream os;
  os << "entrywise vs enumeration for n<=10, k<=4; row sums C(n,k)";
  if (!why.empty()) os << "; " << why;
  report(5, "tuple system coefficients", ok, os.str());
}

// --- 06: pooling consistency -------------------------------------------------

void criterion_06() {
  CounterRng rng(60606);
  std::size_t done = 0;
  std::string why;
  for (int trial = 0; trial < 200 && why.empty(); ++trial) {
    const std::size_t k = 1 + trial % 3;
    const std::size_t n = k + 1 + rng.next_below(6 - k);
    std::shared_ptr<const CpwlFunction> f;
    if (trial % 2 == 0) {
      f = std::make_shared<ReluNet>(
          ReluNet::random(k, {1 + rng.next_below(6)}, 1 + rng.next_below(2), rng));
    } else {
      f = std::make_shared<ExplicitPartition>(
          random_grid_partition(k, 2 + rng.next_below(4), 1, rng));
    }
    PoolingSpec spec{k, n, 1, f};
    std::vector<double> flat(n);
    for (auto& v : flat) v = rng.uniform(0.0, 1.0);

    const auto fast = janossy_pool(spec, flat);
    const auto slow = janossy_pool_permutations(spec, flat);
    const double scale = 1.0 + linf_norm(slow);
    if (linf_diff(fast, slow) > 1e-9 * scale) {
      why = "trial " + std::to_string(trial) + ": forms disagree";
      break;
    }
    ++done;
  }

  // Reordering sweep on one fixed job.
  double max_dev = 0.0;
  if (why.empty()) {
    auto f = std::make_shared<ExplicitPartition>(
        random_grid_partition(2, 3, 2, rng));
    PoolingSpec spec{2, 6, 1, f};
    std::vector<double> flat(6);
    for (auto& v : flat) v = rng.uniform(0.0, 1.0);
    max_dev = invariance_check(spec, flat, 1000, 515).max_deviation;
    if (!(max_dev <= 1e-9)) why = "shuffle deviation too large";
  }

  std::ostringstream os;
  os << done << "/200 jobs match the all-orderings form at 1e-9; max shuffle "
        "deviation "
     << max_dev;
  if (!why.empty()) os << "; " << why;
  report(6, "pooling consistency", why.empty(), os.str());
}

// --- 07: codec round trip ----------------------------------------------------

void criterion_07() {
  CounterRng rng(70707);
  std::size_t done = 0;
  std::string why;
  for (int trial = 0; trial < 1000 && why.empty(); ++trial) {
    const std::size_t d = 1 + trial % 3;
    std::vector<double> lo(d, 0.0), hi(d, 1.0);
    const GridCodec codec = GridCodec::build(0.5, lo, hi);

    std::size_t cap = 1;  // 3 usable levels per axis at separation 1/2
    for (std::size_t j = 0; j < d; ++j) cap *= 3;
    const std::size_t n =
        2 + rng.next_below(std::min<std::size_t>(cap, 64) - 1);
    SeparatedMultisetSampler sampler(d, n, 0.5, lo, hi);
    const Multiset ms = sampler.sample(rng);
    if (!codec.admits(ms)) {
      why = "trial " + std::to_string(trial) + ": sampler left the regime";
      break;
    }
    const Multiset back = codec.decode(codec.encode(ms));
    if (back.size() != ms.size() || !approx_equal(ms, back, 1e-9)) {
      why = "trial " + std::to_string(trial) + ": round trip off";
      break;
    }
    ++done;
  }

  // Boundary dedup: a point sitting on a shared cube facet reads back once.
  bool dedup_ok = false;
  if (why.empty()) {
    const std::vector<double> lo = {0.0, 0.0}, hi = {1.0, 1.0};
    const GridCodec codec = GridCodec::build(0.5, lo, hi);
    const Multiset fixture(2, {{0.25, 0.1}, {0.8, 0.75}});
    const Multiset back = codec.decode(codec.encode(fixture));
    dedup_ok = back.size() == 2 && approx_equal(fixture, back, 1e-12);
    if (!dedup_ok) why = "facet fixture did not collapse";
  }

  std::ostringstream os;
  os << done << "/1000 separated multisets (R=0.5, d<=3) decode at 1e-9; "
        "facet dedup "
     << (dedup_ok ? "ok" : "failed");
  if (!why.empty()) os << "; " << why;
  report(7, "codec round trip", why.empty(), os.str());
}

// --- 08: feature zone identities ---------------------------------------------

void criterion_08() {
  const std::vector<double> lo = {0.0, 0.0}, hi = {1.0, 1.0};
  const GridCodec codec = GridCodec::build(0.5, lo, hi);
  const double s = codec.cube_side(), mu = codec.margin();
  const CubeIndex q = {1, 1};
  const Point c = codec.cube_center(q);

  CounterRng rng(80808);
  std::string why;
  std::size_t inside = 0, shell = 0, outside = 0;
  const std::size_t per_zone = 100000;
  while ((inside < per_zone || shell < per_zone || outside < per_zone) &&
         why.empty()) {
    std::vector<double> x = {c[0] + rng.uniform(-3.0 * s, 3.0 * s),
                             c[1] + rng.uniform(-3.0 * s, 3.0 * s)};
    const double dist = codec.cube_dist(q, x);
    const double ind = codec.indicator_feature(q, x);
    const auto coords = codec.coordinate_feature(q, x);
    if (dist == 0.0) {
      if (inside >= per_zone) continue;
      ++inside;
      if (ind != 1.0 || coords[0] != x[0] - c[0] || coords[1] != x[1] - c[1])
        why = "inside zone identity";
    } else if (dist >= mu) {
      if (outside >= per_zone) continue;
      ++outside;
      if (ind != 0.0 || coords[0] != 0.0 || coords[1] != 0.0)
        why = "outside zone identity";
    } else {
      if (shell >= per_zone) continue;
      ++shell;
      if (std::fabs(ind - (1.0 - dist / mu)) > 1e-15 || ind <= 0.0 ||
          ind >= 1.0)
        why = "margin zone identity";
      if (std::fabs(coords[0]) > (s / 2.0) * ind + 1e-15)
        why = "taper bound";
    }
  }

  // Continuity across both zone boundaries.
  if (why.empty()) {
    for (int t = 0; t < 1000; ++t) {
      const double y = c[1] + rng.uniform(-s / 2.0, s / 2.0);
      for (const double edge :
           {c[0] + s / 2.0, c[0] + s / 2.0 + mu}) {
        const double a = codec.indicator_feature(q, Point{edge - 1e-12, y});
        const double b = codec.indicator_feature(q, Point{edge + 1e-12, y});
        if (std::fabs(a - b) > 1e-9) why = "boundary continuity";
      }
    }
  }

  // Restricted to a random segment, every encoding slot is piecewise linear:
  // between detected kinks, midpoints match linear interpolation.
  if (why.empty()) {
    SeparatedMultisetSampler sampler(2, 3, 0.5, lo, hi);
    const Multiset base = sampler.sample(rng);
    std::vector<double> va(2), vb(2);
    for (auto& v : va) v = rng.uniform(0.1, 0.9);
    for (auto& v : vb) v = rng.uniform(0.1, 0.9);

    auto value = [&](double t) {
      std::vector<Point> pts = base.elements();
      pts[0] = {va[0] + (vb[0] - va[0]) * t, va[1] + (vb[1] - va[1]) * t};
      const auto enc = codec.encode(Multiset(2, pts));
      return enc;
    };

    const std::size_t slots = codec.output_dim();
    const int steps = 512;
    std::vector<std::vector<double>> g(steps + 1);
    for (int i = 0; i <= steps; ++i)
      g[i] = value(static_cast<double>(i) / steps);

    auto d2_at = [&](int i, std::size_t slot) {
      return g[i - 1][slot] - 2.0 * g[i][slot] + g[i + 1][slot];
    };
    std::size_t kinks = 0, checked = 0;
    for (std::size_t slot = 0; slot < slots && why.empty(); ++slot) {
      for (int i = 1; i + 1 <= steps; ++i)
        if (std::fabs(d2_at(i, slot)) > 1e-10) ++kinks;
      // Where the sampled grid shows no curvature, a fresh off-grid probe
      // must land on the chord between its neighbours.
      for (int i = 1; i + 2 <= steps; i += 37) {
        if (std::fabs(d2_at(i, slot)) > 1e-10 ||
            std::fabs(d2_at(i + 1, slot)) > 1e-10)
          continue;
        const auto probe = value((i + 0.5) / steps);
        const double want = 0.5 * (g[i][slot] + g[i + 1][slot]);
        ++checked;
        if (std::fabs(probe[slot] - want) > 1e-9) why = "segment linearity";
      }
    }
    if (why.empty() && checked == 0) why = "segment probe empty";
    if (why.empty() && kinks > 24 * slots) why = "too many kinks";
  }

  std::ostringstream os;
  os << "3x100000 zone probes exact; boundary jumps <= 1e-9; segment "
        "restriction piecewise linear";
  if (!why.empty()) os << "; failed: " << why;
  report(8, "feature zone identities", why.empty(), os.str());
}

// --- 09: embedding distortion ------------------------------------------------

void criterion_09() {
  const std::vector<double> lo = {0.0, 0.0}, hi = {1.0, 1.0};
  const GridCodec codec = GridCodec::build(0.5, lo, hi);
  SeparatedMultisetSampler sampler(2, 8, 0.5, lo, hi);

  CounterRng rng1(90909), rng2(90909);
  const BilipEstimate e1 = bilip_estimate(codec, sampler, 10000, rng1);
  const BilipEstimate e2 = bilip_estimate(codec, sampler, 10000, rng2);

  const bool ok = e1.pairs > 0 && e1.min_ratio > 0.0 &&
                  std::isfinite(e1.max_ratio) &&
                  e1.min_ratio == e2.min_ratio &&
                  e1.max_ratio == e2.max_ratio && e1.pairs == e2.pairs;
  std::ostringstream os;
  os << e1.pairs << " pairs (R=0.5, d=2, n=8): ratio in [" << e1.min_ratio
     << ", " << e1.max_ratio << "], reproducible";
  report(9, "embedding distortion bounds", ok, os.str());
}

// --- 10: matching distance oracle ---------------------------------------------

void criterion_10() {
  CounterRng rng(101010);
  std::size_t done = 0;
  std::string why;
  for (int trial = 0; trial < 1000 && why.empty(); ++trial) {
    const std::size_t d = 1 + trial % 3;
    const std::size_t n = 1 + rng.next_below(7);
    std::vector<double> fa(n * d), fb(n * d);
    for (auto& v : fa) v = rng.uniform(-1.0, 1.0);
    for (auto& v : fb) v = rng.uniform(-1.0, 1.0);
    const Multiset a = Multiset::from_flat(d, fa);
    const Multiset b = Multiset::from_flat(d, fb);
    if (wasserstein_distance(a, b) != wasserstein_bruteforce(a, b)) {
      why = "trial " + std::to_string(trial) + ": solver != enumeration";
      break;
    }
    ++done;
  }
  std::ostringstream os;
  os << done << "/1000 pairs (n<=7) match the n! enumeration exactly";
  if (!why.empty()) os << "; " << why;
  report(10, "matching distance oracle", done == 1000, os.str());
}

// --- 11: resolution scaling ----------------------------------------------------

void criterion_11() {
  const std::vector<double> lo = {0.0, 0.0}, hi = {1.0, 1.0};
  std::vector<std::size_t> axis_counts, totals;
  for (const double R : {0.5, 0.25, 0.125}) {
    const GridCodec codec = GridCodec::build(R, lo, hi);
    // Active index range along axis 0.
    std::int64_t lo_idx = 0, hi_idx = 0;
    bool first = true;
    for (const auto& q : codec.active_cubes()) {
      if (first || q[0] < lo_idx) lo_idx = q[0];
      if (first || q[0] > hi_idx) hi_idx = q[0];
      first = false;
    }
    axis_counts.push_back(static_cast<std::size_t>(hi_idx - lo_idx + 1));
    totals.push_back(codec.num_cubes());
  }

  bool ok = totals.size() == 3;
  // Each halving of R should double the per-axis count up to one boundary
  // cube on each side, i.e. land in [2a-2, 2a+2], and square that per step
  // in total count.
  for (std::size_t i = 0; ok && i + 1 < axis_counts.size(); ++i) {
    const std::size_t a = axis_counts[i], b = axis_counts[i + 1];
    ok = b + 2 >= 2 * a && b <= 2 * a + 2;
    ok = ok && totals[i] == axis_counts[i] * axis_counts[i];
    ok = ok && totals[i + 1] == axis_counts[i + 1] * axis_counts[i + 1];
    const double ratio =
        static_cast<double>(totals[i + 1]) / static_cast<double>(totals[i]);
    ok = ok && ratio > 2.5 && ratio < 4.5;
  }
  ok = ok && axis_counts[0] == 6 && axis_counts[1] == 10 && axis_counts[2] == 18;
  ok = ok && totals[0] == 36 && totals[1] == 100 && totals[2] == 324;

  std::ostringstream os;
  os << "R=0.5/0.25/0.125 -> axis " << axis_counts[0] << "/" << axis_counts[1]
     << "/" << axis_counts[2] << ", cubes " << totals[0] << "/" << totals[1]
     << "/" << totals[2] << " (~4x per halving)";
  report(11, "resolution scaling", ok, os.str());
}

// --- 12: separation analyzer -----------------------------------------------------

void criterion_12() {
  // Synthetic records on a line: gaps g in [0.1, 0.5], one planted at 0.1;
  // every record's normalized separation is exactly its gap.
  std::vector<Multiset> data;
  CounterRng rng(121212);
  data.emplace_back(3, std::vector<Point>{
                           {0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}, {1.0, 0.0, 0.0}});
  for (int i = 0; i < 19; ++i) {
    const double g = rng.uniform(0.12, 0.5);
    data.emplace_back(3, std::vector<Point>{
                             {0.0, 0.0, 0.0}, {g, 0.0, 0.0}, {1.0, 0.0, 0.0}});
  }

  const auto rep = separation_report(data);
  std::vector<double> normalized;
  for (const auto& st : rep.per_multiset) normalized.push_back(st.normalized);

  const Histogram h = make_histogram(normalized, 16);
  const auto dir =
      std::filesystem::temp_directory_path() / "jpool_acceptance_out";
  std::filesystem::create_directories(dir);
  write_histogram_csv(h, (dir / "separation.csv").string());
  write_histogram_svg(h, (dir / "separation.svg").string(),
                      "normalized separation");

  const bool ok = std::fabs(h.min_value - 0.1) <= 1e-12 &&
                  std::fabs(rep.domain_min_normalized - 0.1) <= 1e-12;
  std::ostringstream os;
  os << "20 records, planted minimum 0.1; histogram minimum " << h.min_value;
  report(12, "separation analyzer", ok, os.str());
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_01();
  criterion_02();
  criterion_03();
  criterion_04();
  criterion_05();
  criterion_06();
  criterion_07();
  criterion_08();
  criterion_09();
  criterion_10();
  criterion_11();
  criterion_12();
  const auto t1 = std::chrono::steady_clock::now();
  const double secs =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() /
      1000.0;
  std::printf("%d/12 criteria passed in %.1f s\n", 12 - g_failures, secs);
  return g_failures == 0 ? 0 : 1;
}
