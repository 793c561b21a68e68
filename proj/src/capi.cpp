#include "jpool.h"

#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "jpool/cpwl.hpp"
#include "jpool/grid_codec.hpp"
#include "jpool/io.hpp"
#include "jpool/janossy.hpp"
#include "jpool/multiset.hpp"
#include "jpool/rng.hpp"
#include "jpool/version.hpp"
#include "jpool/witness.hpp"

struct jp_multiset {
  jpool::Multiset ms;
};
struct jp_function {
  std::shared_ptr<const jpool::CpwlFunction> fn;
};
struct jp_certificate {
  jpool::CertificateFile file;
};
struct jp_codec {
  jpool::GridCodec codec;
};
struct jp_dataset {
  std::vector<jpool::XyzRecord> records;
};

namespace {

thread_local std::string g_last_error;

jp_status status_of(jpool::Errc code) {
  using jpool::Errc;
  switch (code) {
    case Errc::invalid_argument:
      return JP_ERR_INVALID_ARGUMENT;
    case Errc::dimension_mismatch:
    case Errc::size_mismatch:
      return JP_ERR_DIMENSION_MISMATCH;
    case Errc::io_failure:
      return JP_ERR_IO;
    case Errc::parse_failure:
      return JP_ERR_PARSE;
    case Errc::domain_violation:
    case Errc::degenerate_input:
      return JP_ERR_DOMAIN;
    case Errc::verification_failure:
      return JP_ERR_VERIFICATION_FAILED;
    case Errc::internal:
      return JP_ERR_INTERNAL;
  }
  return JP_ERR_INTERNAL;
}

template <class Fn>
jp_status guarded(Fn&& fn) {
  try {
    fn();
    return JP_OK;
  } catch (const jpool::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return JP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return JP_ERR_INTERNAL;
  }
}

jp_status fail_null(const char* what) {
  g_last_error = std::string(what) + ": null argument";
  return JP_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

jpool::WitnessOptions cxx_options(const jp_witness_options* opts) {
  jpool::WitnessOptions o;
  if (opts) {
    o.seed_point = opts->seed_point;
    o.seed = opts->seed;
    o.max_attempts = opts->max_attempts;
    o.tol = opts->tol;
    o.min_gap = opts->min_gap;
    o.exact = opts->exact != 0;
  }
  return o;
}

}  // namespace

extern "C" {

const char* jp_last_error(void) { return g_last_error.c_str(); }

const char* jp_version_string(void) { return jpool::kVersion; }

void jp_string_free(char* s) { delete[] s; }

void jp_doubles_free(double* p) { delete[] p; }

/* ------------------------------------------------------------------ */

jp_status jp_multiset_create(size_t dim, const double* flat, size_t count,
                             jp_multiset** out) {
  if (!flat || !out) return fail_null("jp_multiset_create");
  return guarded([&] {
    auto ms = jpool::Multiset::from_flat(
        dim, std::span<const double>(flat, dim * count));
    *out = new jp_multiset{std::move(ms)};
  });
}

void jp_multiset_free(jp_multiset* ms) { delete ms; }

size_t jp_multiset_dim(const jp_multiset* ms) { return ms ? ms->ms.dim() : 0; }

size_t jp_multiset_size(const jp_multiset* ms) {
  return ms ? ms->ms.size() : 0;
}

jp_status jp_multiset_points(const jp_multiset* ms, double* buf, size_t len) {
  if (!ms || !buf) return fail_null("jp_multiset_points");
  return guarded([&] {
    const auto flat = ms->ms.flat();
    jpool::require(len == flat.size(), jpool::Errc::size_mismatch,
                   "jp_multiset_points: buffer length mismatch");
    std::copy(flat.begin(), flat.end(), buf);
  });
}

jp_status jp_multiset_canonical(const jp_multiset* ms, jp_multiset** out) {
  if (!ms || !out) return fail_null("jp_multiset_canonical");
  return guarded([&] { *out = new jp_multiset{ms->ms.canonicalized()}; });
}

jp_status jp_multiset_save(const jp_multiset* ms, const char* path) {
  if (!ms || !path) return fail_null("jp_multiset_save");
  return guarded(
      [&] { jpool::write_text_file(path, jpool::multiset_to_json(ms->ms)); });
}

jp_status jp_multiset_load(const char* path, jp_multiset** out) {
  if (!path || !out) return fail_null("jp_multiset_load");
  return guarded([&] {
    *out = new jp_multiset{
        jpool::multiset_from_json(jpool::read_text_file(path))};
  });
}

jp_status jp_multiset_wasserstein(const jp_multiset* a, const jp_multiset* b,
                                  double* out) {
  if (!a || !b || !out) return fail_null("jp_multiset_wasserstein");
  return guarded([&] { *out = jpool::wasserstein_distance(a->ms, b->ms); });
}

jp_status jp_multiset_min_separation(const jp_multiset* ms, double* out) {
  if (!ms || !out) return fail_null("jp_multiset_min_separation");
  return guarded([&] { *out = jpool::min_separation(ms->ms); });
}

/* ------------------------------------------------------------------ */

void jp_function_free(jp_function* f) { delete f; }

size_t jp_function_input_dim(const jp_function* f) {
  return f ? f->fn->input_dim() : 0;
}

size_t jp_function_output_dim(const jp_function* f) {
  return f ? f->fn->output_dim() : 0;
}

jp_status jp_function_eval(const jp_function* f, const double* x, size_t x_len,
                           double* out, size_t out_len) {
  if (!f || !x || !out) return fail_null("jp_function_eval");
  return guarded([&] {
    jpool::require(x_len == f->fn->input_dim(), jpool::Errc::dimension_mismatch,
                   "jp_function_eval: input length mismatch");
    jpool::require(out_len == f->fn->output_dim(),
                   jpool::Errc::dimension_mismatch,
                   "jp_function_eval: output length mismatch");
    const auto y = f->fn->evaluate(std::span<const double>(x, x_len));
    std::copy(y.begin(), y.end(), out);
  });
}

jp_status jp_function_save(const jp_function* f, const char* path) {
  if (!f || !path) return fail_null("jp_function_save");
  return guarded(
      [&] { jpool::write_text_file(path, jpool::function_to_json(*f->fn)); });
}

jp_status jp_function_load(const char* path, jp_function** out) {
  if (!path || !out) return fail_null("jp_function_load");
  return guarded([&] {
    *out = new jp_function{
        jpool::function_from_json(jpool::read_text_file(path))};
  });
}

jp_status jp_function_random_relu(size_t input_dim, const size_t* hidden,
                                  size_t hidden_len, size_t output_dim,
                                  uint64_t seed, jp_function** out) {
  if (!out || (hidden_len > 0 && !hidden))
    return fail_null("jp_function_random_relu");
  return guarded([&] {
    std::vector<std::size_t> widths(hidden, hidden + hidden_len);
    jpool::CounterRng rng(seed);
    *out = new jp_function{std::make_shared<jpool::ReluNet>(
        jpool::ReluNet::random(input_dim, widths, output_dim, rng))};
  });
}

jp_status jp_function_random_partition(size_t dim, size_t resolution,
                                       size_t output_dim, uint64_t seed,
                                       jp_function** out) {
  if (!out) return fail_null("jp_function_random_partition");
  return guarded([&] {
    jpool::CounterRng rng(seed);
    *out = new jp_function{std::make_shared<jpool::ExplicitPartition>(
        jpool::random_grid_partition(dim, resolution, output_dim, rng))};
  });
}

/* ------------------------------------------------------------------ */

jp_status jp_janossy_pool(const jp_function* f, size_t arity, size_t count,
                          size_t point_dim, const double* flat, size_t flat_len,
                          double* out, size_t out_len) {
  if (!f || !flat || !out) return fail_null("jp_janossy_pool");
  return guarded([&] {
    jpool::PoolingSpec spec{arity, count, point_dim, f->fn};
    jpool::require(flat_len == count * point_dim,
                   jpool::Errc::size_mismatch,
                   "jp_janossy_pool: flat length mismatch");
    jpool::require(out_len == f->fn->output_dim(),
                   jpool::Errc::dimension_mismatch,
                   "jp_janossy_pool: output length mismatch");
    const auto pooled =
        jpool::janossy_pool(spec, std::span<const double>(flat, flat_len));
    std::copy(pooled.begin(), pooled.end(), out);
  });
}

jp_status jp_invariance_check(const jp_function* f, size_t arity, size_t count,
                              size_t point_dim, const double* flat,
                              size_t flat_len, size_t trials, uint64_t seed,
                              double* max_deviation) {
  if (!f || !flat || !max_deviation) return fail_null("jp_invariance_check");
  return guarded([&] {
    jpool::PoolingSpec spec{arity, count, point_dim, f->fn};
    jpool::require(flat_len == count * point_dim, jpool::Errc::size_mismatch,
                   "jp_invariance_check: flat length mismatch");
    const auto rep = jpool::invariance_check(
        spec, std::span<const double>(flat, flat_len), trials, seed);
    *max_deviation = rep.max_deviation;
  });
}

/* ------------------------------------------------------------------ */

void jp_witness_options_init(jp_witness_options* opts) {
  if (!opts) return;
  const jpool::WitnessOptions d;
  opts->seed_point = d.seed_point;
  opts->seed = d.seed;
  opts->max_attempts = d.max_attempts;
  opts->tol = d.tol;
  opts->min_gap = d.min_gap;
  opts->exact = d.exact ? 1 : 0;
}

jp_status jp_find_collision(const jp_function* f, size_t arity, size_t count,
                            const jp_witness_options* opts,
                            jp_certificate** out) {
  if (!f || !out) return fail_null("jp_find_collision");
  return guarded([&] {
    const auto o = cxx_options(opts);
    auto cert = jpool::find_collision(f->fn, arity, count, o);
    *out = new jp_certificate{{std::move(cert), f->fn, o.exact, o.tol}};
  });
}

jp_status jp_find_lifted_collision(const jp_function* f, size_t arity,
                                   size_t count, const double* alpha,
                                   const double* beta, size_t point_dim,
                                   const jp_witness_options* opts,
                                   jp_certificate** out) {
  if (!f || !alpha || !beta || !out)
    return fail_null("jp_find_lifted_collision");
  return guarded([&] {
    const auto o = cxx_options(opts);
    jpool::Point a(alpha, alpha + point_dim), b(beta, beta + point_dim);
    auto cert = jpool::find_lifted_collision(f->fn, arity, count, a, b, o);
    *out = new jp_certificate{{std::move(cert), f->fn, o.exact, o.tol}};
  });
}

void jp_certificate_free(jp_certificate* cert) { delete cert; }

jp_status jp_certificate_info(const jp_certificate* cert, size_t* arity,
                              size_t* count, size_t* point_dim, int* exact) {
  if (!cert) return fail_null("jp_certificate_info");
  if (arity) *arity = cert->file.cert.arity;
  if (count) *count = cert->file.cert.count;
  if (point_dim) *point_dim = cert->file.cert.point_dim;
  if (exact) *exact = cert->file.exact ? 1 : 0;
  return JP_OK;
}

jp_status jp_certificate_save(const jp_certificate* cert, const char* path) {
  if (!cert || !path) return fail_null("jp_certificate_save");
  return guarded([&] {
    jpool::write_text_file(path, jpool::certificate_to_json(cert->file));
  });
}

jp_status jp_certificate_load(const char* path, jp_certificate** out) {
  if (!path || !out) return fail_null("jp_certificate_load");
  return guarded([&] {
    *out = new jp_certificate{
        jpool::certificate_from_json(jpool::read_text_file(path))};
  });
}

jp_status jp_certificate_multisets(const jp_certificate* cert,
                                   jp_multiset** base,
                                   jp_multiset** perturbed) {
  if (!cert || !base || !perturbed)
    return fail_null("jp_certificate_multisets");
  return guarded([&] {
    auto [a, b] = jpool::collision_multisets(cert->file.cert);
    *base = new jp_multiset{std::move(a)};
    *perturbed = new jp_multiset{std::move(b)};
  });
}

jp_status jp_certificate_verify(const jp_certificate* cert, int exact,
                                double tol, jp_verify_result* result,
                                char** report) {
  if (!cert || !result) return fail_null("jp_certificate_verify");
  return guarded([&] {
    jpool::WitnessOptions o;
    o.exact = exact < 0 ? cert->file.exact : (exact != 0);
    o.tol = tol < 0 ? cert->file.tol : tol;
    const auto rep =
        jpool::verify_collision(cert->file.function, cert->file.cert, o);
    result->ok = rep.ok() ? 1 : 0;
    result->pooled_residual = rep.pooled_residual;
    result->multiset_gap = rep.multiset_gap;
    if (report) {
      std::ostringstream os;
      for (const auto& item : rep.items) {
        os << (item.pass ? "PASS " : "FAIL ") << item.name;
        if (!item.detail.empty()) os << "  [" << item.detail << "]";
        os << "\n";
      }
      *report = dup_string(os.str());
    }
  });
}

/* ------------------------------------------------------------------ */

jp_status jp_codec_build(double separation, const double* box_lo,
                         const double* box_hi, size_t dim, double margin,
                         jp_codec** out) {
  if (!box_lo || !box_hi || !out) return fail_null("jp_codec_build");
  return guarded([&] {
    *out = new jp_codec{jpool::GridCodec::build(
        separation, std::span<const double>(box_lo, dim),
        std::span<const double>(box_hi, dim), margin)};
  });
}

void jp_codec_free(jp_codec* codec) { delete codec; }

size_t jp_codec_dim(const jp_codec* codec) {
  return codec ? codec->codec.dim() : 0;
}

size_t jp_codec_output_dim(const jp_codec* codec) {
  return codec ? codec->codec.output_dim() : 0;
}

double jp_codec_separation(const jp_codec* codec) {
  return codec ? codec->codec.separation() : 0.0;
}

double jp_codec_margin(const jp_codec* codec) {
  return codec ? codec->codec.margin() : 0.0;
}

size_t jp_codec_num_cubes(const jp_codec* codec) {
  return codec ? codec->codec.num_cubes() : 0;
}

jp_status jp_codec_save(const jp_codec* codec, const char* path) {
  if (!codec || !path) return fail_null("jp_codec_save");
  return guarded([&] {
    jpool::write_text_file(path, jpool::codec_to_json(codec->codec));
  });
}

jp_status jp_codec_load(const char* path, jp_codec** out) {
  if (!path || !out) return fail_null("jp_codec_load");
  return guarded([&] {
    *out = new jp_codec{jpool::codec_from_json(jpool::read_text_file(path))};
  });
}

jp_status jp_codec_admits(const jp_codec* codec, const jp_multiset* ms,
                          int* out) {
  if (!codec || !ms || !out) return fail_null("jp_codec_admits");
  return guarded([&] { *out = codec->codec.admits(ms->ms) ? 1 : 0; });
}

jp_status jp_codec_encode(const jp_codec* codec, const jp_multiset* ms,
                          double* out, size_t out_len) {
  if (!codec || !ms || !out) return fail_null("jp_codec_encode");
  return guarded([&] {
    jpool::require(out_len == codec->codec.output_dim(),
                   jpool::Errc::size_mismatch,
                   "jp_codec_encode: buffer length mismatch");
    const auto enc = codec->codec.encode(ms->ms);
    std::copy(enc.begin(), enc.end(), out);
  });
}

jp_status jp_codec_decode(const jp_codec* codec, const double* encoding,
                          size_t len, double ind_tol, jp_multiset** out) {
  if (!codec || !encoding || !out) return fail_null("jp_codec_decode");
  return guarded([&] {
    auto ms = codec->codec.decode(std::span<const double>(encoding, len),
                                  ind_tol > 0 ? ind_tol : 1e-6);
    *out = new jp_multiset{std::move(ms)};
  });
}

jp_status jp_encoding_save(const jp_codec* codec, const double* values,
                           size_t len, const char* path) {
  if (!codec || !values || !path) return fail_null("jp_encoding_save");
  return guarded([&] {
    jpool::write_text_file(
        path, jpool::encoding_to_json(codec->codec,
                                      std::span<const double>(values, len)));
  });
}

jp_status jp_encoding_load(const char* path, jp_codec** codec_out,
                           double** values_out, size_t* len_out) {
  if (!path || !codec_out || !values_out || !len_out)
    return fail_null("jp_encoding_load");
  return guarded([&] {
    auto [codec, values] =
        jpool::encoding_from_json(jpool::read_text_file(path));
    double* buf = new double[values.size()];
    std::copy(values.begin(), values.end(), buf);
    *codec_out = new jp_codec{std::move(codec)};
    *values_out = buf;
    *len_out = values.size();
  });
}

jp_status jp_bilip_estimate(const jp_codec* codec, size_t count,
                            double sample_separation, size_t trials,
                            uint64_t seed, double* min_ratio, double* max_ratio,
                            size_t* pairs) {
  if (!codec || !min_ratio || !max_ratio) return fail_null("jp_bilip_estimate");
  return guarded([&] {
    const auto& c = codec->codec;
    jpool::SeparatedMultisetSampler sampler(c.dim(), count, sample_separation,
                                            c.box_lo(), c.box_hi());
    jpool::CounterRng rng(seed);
    const auto est = jpool::bilip_estimate(c, sampler, trials, rng);
    *min_ratio = est.min_ratio;
    *max_ratio = est.max_ratio;
    if (pairs) *pairs = est.pairs;
  });
}

/* ------------------------------------------------------------------ */

jp_status jp_dataset_load_xyz(const char* path, jp_dataset** out) {
  if (!path || !out) return fail_null("jp_dataset_load_xyz");
  return guarded([&] { *out = new jp_dataset{jpool::load_xyz(path)}; });
}

void jp_dataset_free(jp_dataset* ds) { delete ds; }

size_t jp_dataset_size(const jp_dataset* ds) {
  return ds ? ds->records.size() : 0;
}

jp_status jp_dataset_get(const jp_dataset* ds, size_t index,
                         jp_multiset** out) {
  if (!ds || !out) return fail_null("jp_dataset_get");
  return guarded([&] {
    jpool::require(index < ds->records.size(), jpool::Errc::invalid_argument,
                   "jp_dataset_get: index out of range");
    *out = new jp_multiset{ds->records[index].points};
  });
}

jp_status jp_separation_report(const jp_dataset* ds, double* domain_min_sep,
                               double* domain_min_normalized,
                               double** normalized_out, size_t* count_out) {
  if (!ds || !domain_min_sep || !domain_min_normalized)
    return fail_null("jp_separation_report");
  return guarded([&] {
    std::vector<jpool::Multiset> data;
    data.reserve(ds->records.size());
    for (const auto& rec : ds->records) data.push_back(rec.points);
    const auto rep = jpool::separation_report(data);
    *domain_min_sep = rep.domain_min_separation;
    *domain_min_normalized = rep.domain_min_normalized;
    if (normalized_out && count_out) {
      double* buf = new double[rep.per_multiset.size()];
      for (std::size_t i = 0; i < rep.per_multiset.size(); ++i)
        buf[i] = rep.per_multiset[i].normalized;
      *normalized_out = buf;
      *count_out = rep.per_multiset.size();
    }
  });
}

jp_status jp_histogram_write(const double* values, size_t len, size_t bins,
                             const char* csv_path, const char* svg_path,
                             const char* title, double* out_min,
                             double* out_mean) {
  if (!values) return fail_null("jp_histogram_write");
  return guarded([&] {
    const auto h = jpool::make_histogram(
        std::span<const double>(values, len), bins);
    if (csv_path) jpool::write_histogram_csv(h, csv_path);
    if (svg_path)
      jpool::write_histogram_svg(h, svg_path, title ? title : "histogram");
    if (out_min) *out_min = h.min_value;
    if (out_mean) *out_mean = h.mean;
  });
}

} /* extern "C" */
