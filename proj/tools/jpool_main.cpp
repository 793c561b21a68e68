// Command-line front end. Talks to the library strictly through the C API.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jpool.h"

namespace {

int fail(jp_status st, const char* where) {
  std::fprintf(stderr, "error: %s: %s (status %d)\n", where, jp_last_error(),
               static_cast<int>(st));
  return 2;
}

#define CHECK(call)                                 \
  do {                                              \
    jp_status st_ = (call);                         \
    if (st_ != JP_OK) return fail(st_, #call);      \
  } while (0)

struct FunctionHandle {
  jp_function* f = nullptr;
  ~FunctionHandle() { jp_function_free(f); }
};
struct MultisetHandle {
  jp_multiset* m = nullptr;
  ~MultisetHandle() { jp_multiset_free(m); }
};
struct CertificateHandle {
  jp_certificate* c = nullptr;
  ~CertificateHandle() { jp_certificate_free(c); }
};
struct CodecHandle {
  jp_codec* c = nullptr;
  ~CodecHandle() { jp_codec_free(c); }
};
struct DatasetHandle {
  jp_dataset* d = nullptr;
  ~DatasetHandle() { jp_dataset_free(d); }
};

// Load --function if given, otherwise draw a fresh ReLU net on arity*dim
// inputs with the requested hidden widths.
int obtain_function(const std::string& path, std::size_t arity,
                    std::size_t dim, const std::vector<std::size_t>& widths,
                    std::uint64_t seed, FunctionHandle& out) {
  if (!path.empty()) {
    CHECK(jp_function_load(path.c_str(), &out.f));
    return 0;
  }
  CHECK(jp_function_random_relu(arity * dim, widths.data(), widths.size(), 1,
                                seed, &out.f));
  return 0;
}

int print_multiset(const char* tag, jp_multiset* ms) {
  const std::size_t n = jp_multiset_size(ms);
  const std::size_t d = jp_multiset_dim(ms);
  std::vector<double> flat(n * d);
  CHECK(jp_multiset_points(ms, flat.data(), flat.size()));
  std::printf("%s (%zu points, dim %zu):\n", tag, n, d);
  for (std::size_t i = 0; i < n; ++i) {
    std::printf(" ");
    for (std::size_t j = 0; j < d; ++j)
      std::printf(" %.17g", flat[i * d + j]);
    std::printf("\n");
  }
  return 0;
}

int run_witness(const std::string& function_path, std::size_t k, long long n_opt,
                std::size_t dim, const std::vector<std::size_t>& widths,
                const std::vector<double>& alpha_opt,
                const std::vector<double>& beta_opt, std::uint64_t seed,
                double seed_point, int max_attempts, double tol, double min_gap,
                bool rational, const std::string& out_path) {
  const std::size_t n =
      n_opt > 0 ? static_cast<std::size_t>(n_opt) : k + 1;

  FunctionHandle fn;
  if (int rc = obtain_function(function_path, k, dim, widths, seed, fn))
    return rc;

  jp_witness_options opts;
  jp_witness_options_init(&opts);
  opts.seed = seed;
  opts.seed_point = seed_point;
  opts.max_attempts = max_attempts;
  opts.tol = tol;
  opts.min_gap = min_gap;
  opts.exact = rational ? 1 : 0;

  CertificateHandle cert;
  if (dim == 1) {
    CHECK(jp_find_collision(fn.f, k, n, &opts, &cert.c));
  } else {
    std::vector<double> alpha = alpha_opt, beta = beta_opt;
    if (alpha.empty()) alpha.assign(dim, 0.0);
    if (beta.empty()) beta.assign(dim, 1.0);
    if (alpha.size() != dim || beta.size() != dim) {
      std::fprintf(stderr, "error: --alpha/--beta need %zu coordinates\n", dim);
      return 2;
    }
    CHECK(jp_find_lifted_collision(fn.f, k, n, alpha.data(), beta.data(), dim,
                                   &opts, &cert.c));
  }

  MultisetHandle a, b;
  CHECK(jp_certificate_multisets(cert.c, &a.m, &b.m));
  double gap = 0.0;
  CHECK(jp_multiset_wasserstein(a.m, b.m, &gap));

  jp_verify_result result{};
  CHECK(jp_certificate_verify(cert.c, -1, -1.0, &result, nullptr));

  std::printf("collision witness: k=%zu n=%zu dim=%zu\n", k, n, dim);
  if (int rc = print_multiset("multiset A", a.m)) return rc;
  if (int rc = print_multiset("multiset B", b.m)) return rc;
  std::printf("matching distance: %.17g\n", gap);
  std::printf("pooled residual:   %.17g\n", result.pooled_residual);
  std::printf("self-check:        %s\n", result.ok ? "ok" : "FAILED");

  if (!out_path.empty()) {
    CHECK(jp_certificate_save(cert.c, out_path.c_str()));
    std::printf("certificate written to %s\n", out_path.c_str());
  }
  return result.ok ? 0 : 1;
}

int run_verify(const std::string& in_path, int rational, double tol,
               bool quiet) {
  CertificateHandle cert;
  CHECK(jp_certificate_load(in_path.c_str(), &cert.c));

  std::size_t k = 0, n = 0, d = 0;
  int stored_exact = 0;
  CHECK(jp_certificate_info(cert.c, &k, &n, &d, &stored_exact));
  std::printf("certificate: k=%zu n=%zu dim=%zu (stored mode: %s)\n", k, n, d,
              stored_exact ? "rational" : "float");

  jp_verify_result result{};
  char* report = nullptr;
  CHECK(jp_certificate_verify(cert.c, rational, tol, &result, &report));
  if (!quiet && report) std::fputs(report, stdout);
  jp_string_free(report);

  std::printf("pooled residual: %.17g\n", result.pooled_residual);
  std::printf("multiset gap:    %.17g\n", result.multiset_gap);
  std::printf(result.ok ? "VERIFIED\n" : "VERIFICATION FAILED\n");
  return result.ok ? 0 : 1;
}

int run_encode(const std::string& in_path, double separation, double margin,
               std::vector<double> box_lo, std::vector<double> box_hi,
               const std::string& codec_path, const std::string& out_path) {
  MultisetHandle ms;
  CHECK(jp_multiset_load(in_path.c_str(), &ms.m));
  const std::size_t d = jp_multiset_dim(ms.m);

  CodecHandle codec;
  if (!codec_path.empty()) {
    CHECK(jp_codec_load(codec_path.c_str(), &codec.c));
  } else {
    if (box_lo.empty()) box_lo.assign(d, 0.0);
    if (box_hi.empty()) box_hi.assign(d, 1.0);
    if (box_lo.size() != d || box_hi.size() != d) {
      std::fprintf(stderr, "error: --box-lo/--box-hi need %zu coordinates\n",
                   d);
      return 2;
    }
    CHECK(jp_codec_build(separation, box_lo.data(), box_hi.data(), d, margin,
                         &codec.c));
  }

  int admissible = 0;
  CHECK(jp_codec_admits(codec.c, ms.m, &admissible));
  if (!admissible)
    std::fprintf(stderr,
                 "warning: multiset is outside the codec's injectivity "
                 "regime; decode may not recover it\n");

  std::vector<double> enc(jp_codec_output_dim(codec.c));
  CHECK(jp_codec_encode(codec.c, ms.m, enc.data(), enc.size()));
  std::printf("encoded %zu points -> %zu features (%zu cubes, side %.17g, "
              "margin %.17g)\n",
              jp_multiset_size(ms.m), enc.size(), jp_codec_num_cubes(codec.c),
              jp_codec_separation(codec.c) / 2.0, jp_codec_margin(codec.c));
  if (!out_path.empty()) {
    CHECK(jp_encoding_save(codec.c, enc.data(), enc.size(), out_path.c_str()));
    std::printf("encoding written to %s\n", out_path.c_str());
  }
  return 0;
}

int run_decode(const std::string& in_path, double ind_tol,
               const std::string& out_path) {
  jp_codec* codec_raw = nullptr;
  double* values = nullptr;
  std::size_t len = 0;
  CHECK(jp_encoding_load(in_path.c_str(), &codec_raw, &values, &len));
  CodecHandle codec;
  codec.c = codec_raw;

  MultisetHandle ms;
  const jp_status st = jp_codec_decode(codec.c, values, len, ind_tol, &ms.m);
  jp_doubles_free(values);
  if (st != JP_OK) return fail(st, "jp_codec_decode");

  if (int rc = print_multiset("decoded", ms.m)) return rc;
  if (!out_path.empty()) {
    CHECK(jp_multiset_save(ms.m, out_path.c_str()));
    std::printf("multiset written to %s\n", out_path.c_str());
  }
  return 0;
}

int run_separation(const std::string& in_path, std::size_t bins,
                   const std::string& out_prefix) {
  DatasetHandle ds;
  CHECK(jp_dataset_load_xyz(in_path.c_str(), &ds.d));

  double domain_min = 0.0, domain_min_norm = 0.0;
  double* normalized = nullptr;
  std::size_t count = 0;
  CHECK(jp_separation_report(ds.d, &domain_min, &domain_min_norm, &normalized,
                             &count));

  std::printf("records:                    %zu\n", count);
  std::printf("domain min separation:      %.17g\n", domain_min);
  std::printf("domain min normalized sep:  %.17g\n", domain_min_norm);

  int rc = 0;
  if (!out_prefix.empty()) {
    const std::string csv = out_prefix + ".csv";
    const std::string svg = out_prefix + ".svg";
    double hist_min = 0.0, hist_mean = 0.0;
    jp_status st = jp_histogram_write(normalized, count, bins, csv.c_str(),
                                      svg.c_str(), "normalized separation",
                                      &hist_min, &hist_mean);
    if (st != JP_OK) {
      rc = fail(st, "jp_histogram_write");
    } else {
      std::printf("histogram min %.17g mean %.17g -> %s, %s\n", hist_min,
                  hist_mean, csv.c_str(), svg.c_str());
    }
  }
  jp_doubles_free(normalized);
  return rc;
}

int run_bilip(double separation, double margin, std::size_t dim, std::size_t n,
              std::size_t trials, std::uint64_t seed) {
  std::vector<double> lo(dim, 0.0), hi(dim, 1.0);
  CodecHandle codec;
  CHECK(jp_codec_build(separation, lo.data(), hi.data(), dim, margin,
                       &codec.c));

  // Sample pairs from the regime the codec is injective on.
  const double sample_sep =
      separation / 2.0 + 2.0 * jp_codec_margin(codec.c) + 1e-12;
  double min_ratio = 0.0, max_ratio = 0.0;
  std::size_t pairs = 0;
  CHECK(jp_bilip_estimate(codec.c, n, sample_sep, trials, seed, &min_ratio,
                          &max_ratio, &pairs));
  std::printf("bilipschitz ratios over %zu pairs (n=%zu, dim=%zu, %zu "
              "features):\n",
              pairs, n, dim, jp_codec_output_dim(codec.c));
  std::printf("  min ||E(A)-E(B)||_inf / d_W(A,B): %.17g\n", min_ratio);
  std::printf("  max ||E(A)-E(B)||_inf / d_W(A,B): %.17g\n", max_ratio);
  return (pairs > 0 && min_ratio > 0.0) ? 0 : 1;
}

int run_invariance(const std::string& function_path, const std::string& in_path,
                   std::size_t k, long long n_opt, std::size_t dim,
                   const std::vector<std::size_t>& widths, std::size_t trials,
                   std::uint64_t seed) {
  std::size_t n = n_opt > 0 ? static_cast<std::size_t>(n_opt) : k + 2;
  std::vector<double> flat;
  if (!in_path.empty()) {
    MultisetHandle ms;
    CHECK(jp_multiset_load(in_path.c_str(), &ms.m));
    n = jp_multiset_size(ms.m);
    dim = jp_multiset_dim(ms.m);
    flat.resize(n * dim);
    CHECK(jp_multiset_points(ms.m, flat.data(), flat.size()));
  } else {
    // Deterministic but seed-dependent probe points.
    flat.resize(n * dim);
    std::uint64_t state = seed * 0x9E3779B97F4A7C15ULL + 1;
    for (double& v : flat) {
      state ^= state >> 12;
      state ^= state << 25;
      state ^= state >> 27;
      v = static_cast<double>((state * 0x2545F4914F6CDD1DULL) >> 11) /
          9007199254740992.0;
    }
  }

  FunctionHandle fn;
  if (int rc = obtain_function(function_path, k, dim, widths, seed, fn))
    return rc;

  double max_dev = 0.0;
  CHECK(jp_invariance_check(fn.f, k, n, dim, flat.data(), flat.size(), trials,
                            seed, &max_dev));
  std::printf("invariance over %zu shuffles (k=%zu n=%zu dim=%zu): max "
              "deviation %.17g\n",
              trials, k, n, dim, max_dev);
  return max_dev == 0.0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symmetric pooling toolkit"};
  app.set_version_flag("--version", std::string(jp_version_string()));
  app.require_subcommand(1);

  // Shared knobs (each subcommand registers the ones it uses).
  std::string function_path, in_path, out_path, codec_path, out_prefix;
  std::size_t k = 1, dim = 1, trials = 100, bins = 20, n_bilip = 8;
  long long n = -1;
  std::vector<std::size_t> widths{4, 4};
  std::vector<double> alpha, beta, box_lo, box_hi;
  std::uint64_t seed = 42;
  double seed_point = 0.25, tol = 1e-9, min_gap = 1e-6;
  double separation = 0.5, margin = -1.0, ind_tol = 1e-6;
  int max_attempts = 16;
  bool rational = false, quiet = false;

  auto* witness = app.add_subcommand(
      "witness", "find two different multisets with identical pooled output");
  witness->add_option("--function", function_path,
                      "CPwL function file (default: random ReLU net)");
  witness->add_option("--k", k, "tuple size the function consumes");
  witness->add_option("--n", n, "number of points (default k+1)");
  witness->add_option("--dim", dim, "point dimension (lifts onto a segment)");
  witness->add_option("--widths", widths, "hidden widths for the random net");
  witness->add_option("--alpha", alpha, "segment start for dim > 1");
  witness->add_option("--beta", beta, "segment end for dim > 1");
  witness->add_option("--seed", seed, "random seed");
  witness->add_option("--seed-point", seed_point, "diagonal seed in (0,1)");
  witness->add_option("--max-attempts", max_attempts, "search retries");
  witness->add_option("--tol", tol, "verification tolerance");
  witness->add_option("--min-gap", min_gap, "wanted gap between multisets");
  witness->add_flag("--rational", rational, "also run exact-arithmetic checks");
  witness->add_option("--out", out_path, "certificate output file");

  auto* verify = app.add_subcommand(
      "verify", "re-check a collision certificate from scratch");
  verify->add_option("--in", in_path, "certificate file")->required();
  verify->add_flag("--rational", rational,
                   "force exact-arithmetic checks regardless of stored mode");
  verify->add_option("--tol", tol, "override stored tolerance");
  verify->add_flag("--quiet", quiet, "suppress the per-check report");

  auto* encode = app.add_subcommand(
      "encode", "embed a separated multiset into grid features");
  encode->add_option("--in", in_path, "multiset file")->required();
  encode->add_option("--separation", separation, "target separation level");
  encode->add_option("--margin", margin, "indicator margin (default sep/8)");
  encode->add_option("--box-lo", box_lo, "box lower corner (default zeros)");
  encode->add_option("--box-hi", box_hi, "box upper corner (default ones)");
  encode->add_option("--codec", codec_path, "reuse a saved codec");
  encode->add_option("--out", out_path, "encoding output file");

  auto* decode = app.add_subcommand(
      "decode", "recover the multiset from an encoding file");
  decode->add_option("--in", in_path, "encoding file")->required();
  decode->add_option("--ind-tol", ind_tol, "indicator acceptance tolerance");
  decode->add_option("--out", out_path, "multiset output file");

  auto* separation_cmd = app.add_subcommand(
      "separation", "per-record separation statistics of an xyz trajectory");
  separation_cmd->add_option("--in", in_path, "xyz file")->required();
  separation_cmd->add_option("--bins", bins, "histogram bins");
  separation_cmd->add_option("--out", out_prefix,
                             "histogram output prefix (.csv/.svg)");

  auto* bilip = app.add_subcommand(
      "bilip", "sampled distortion ratios of the grid embedding");
  bilip->add_option("--separation", separation, "codec separation level");
  bilip->add_option("--margin", margin, "indicator margin (default sep/8)");
  bilip->add_option("--dim", dim, "point dimension");
  bilip->add_option("--n", n_bilip, "points per multiset");
  bilip->add_option("--trials", trials, "sampled pairs");
  bilip->add_option("--seed", seed, "random seed");

  auto* invariance = app.add_subcommand(
      "invariance", "pooled output under random input reorderings");
  invariance->add_option("--function", function_path,
                         "CPwL function file (default: random ReLU net)");
  invariance->add_option("--in", in_path, "multiset file (default: random)");
  invariance->add_option("--k", k, "tuple size");
  invariance->add_option("--n", n, "number of points (default k+2)");
  invariance->add_option("--dim", dim, "point dimension");
  invariance->add_option("--widths", widths, "hidden widths for random net");
  invariance->add_option("--trials", trials, "number of reorderings");
  invariance->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  if (witness->parsed())
    return run_witness(function_path, k, n, dim, widths, alpha, beta, seed,
                       seed_point, max_attempts, tol, min_gap, rational,
                       out_path);
  if (verify->parsed())
    return run_verify(in_path, rational ? 1 : -1,
                      verify->count("--tol") ? tol : -1.0, quiet);
  if (encode->parsed())
    return run_encode(in_path, separation, margin, box_lo, box_hi, codec_path,
                      out_path);
  if (decode->parsed()) return run_decode(in_path, ind_tol, out_path);
  if (separation_cmd->parsed())
    return run_separation(in_path, bins, out_prefix);
  if (bilip->parsed())
    return run_bilip(separation, margin, dim, n_bilip, trials, seed);
  if (invariance->parsed())
    return run_invariance(function_path, in_path, k, n, dim, widths, trials,
                          seed);
  return 2;
}
