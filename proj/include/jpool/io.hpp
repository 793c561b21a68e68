#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jpool/cpwl.hpp"
#include "jpool/grid_codec.hpp"
#include "jpool/multiset.hpp"
#include "jpool/witness.hpp"

namespace jpool {

// Plain text helpers; both map failures onto Errc::io_failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// ---------------------------------------------------------------------------
// xyz trajectories: frame = count line, comment line, then one labelled point
// per line. Extra columns after z are ignored.

struct XyzRecord {
  std::string comment;
  std::vector<std::string> labels;
  Multiset points{3};
};

std::vector<XyzRecord> parse_xyz(std::istream& in);
std::vector<XyzRecord> load_xyz(const std::string& path);

// ---------------------------------------------------------------------------
// Histograms

struct Histogram {
  std::vector<double> edges;        // bins + 1 ascending
  std::vector<std::size_t> counts;  // bins
  double min_value = 0.0;
  double max_value = 0.0;
  double mean = 0.0;
  std::size_t total = 0;
};

Histogram make_histogram(std::span<const double> values, std::size_t bins);
void write_histogram_csv(const Histogram& h, const std::string& path);
void write_histogram_svg(const Histogram& h, const std::string& path,
                         const std::string& title);

// ---------------------------------------------------------------------------
// JSON forms. All writers produce deterministic bytes (sorted keys, shortest
// round-trip floats); all readers validate shape and re-derive anything
// derivable, failing with Errc::parse_failure on malformed input.

std::string multiset_to_json(const Multiset& m);
Multiset multiset_from_json(const std::string& text);

// Functions serialize structurally: partitions, relu nets, precompositions
// and symmetrizations of those.
std::string function_to_json(const CpwlFunction& f);
std::shared_ptr<CpwlFunction> function_from_json(const std::string& text);

std::string codec_to_json(const GridCodec& c);
GridCodec codec_from_json(const std::string& text);

std::string encoding_to_json(const GridCodec& c, std::span<const double> values);
std::pair<GridCodec, std::vector<double>> encoding_from_json(
    const std::string& text);

// Certificate files embed the function so verification is standalone.
struct CertificateFile {
  CollisionCertificate cert;
  std::shared_ptr<const CpwlFunction> function;
  bool exact = false;
  double tol = 1e-9;
};

std::string certificate_to_json(const CertificateFile& file);
CertificateFile certificate_from_json(const std::string& text);

std::string nested_to_json(const NestedPointCertificate& cert,
                           const CpwlFunction& region_source);
std::pair<NestedPointCertificate, std::shared_ptr<CpwlFunction>>
nested_from_json(const std::string& text);

}  // namespace jpool
