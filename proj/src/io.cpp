#include "jpool/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jpool/numeric.hpp"
#include "jpool/rational.hpp"
#include "jpool/version.hpp"

namespace jpool {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) {
  raise(Errc::parse_failure, "json: " + what);
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    bad(e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void expect_header(const json& j, const std::string& type) {
  if (!j.is_object()) bad("expected an object");
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    bad("missing format_version");
  if (j["format_version"].get<int>() != kFormatVersion)
    bad("unsupported format_version");
  if (!j.contains("type") || j["type"] != type)
    bad("expected type '" + type + "'");
}

std::vector<double> doubles_from(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) bad(what + " must hold numbers");
    out.push_back(v.get<double>());
    require(std::isfinite(out.back()), Errc::parse_failure,
            "json: " + what + " holds a non-finite value");
  }
  return out;
}

json affine_to(const AffineMap& m) {
  return json{{"rows", m.rows},
              {"cols", m.cols},
              {"weights", m.weights},
              {"bias", m.bias}};
}

AffineMap affine_from(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols"))
    bad("affine map needs rows/cols");
  AffineMap m;
  m.rows = j["rows"].get<std::size_t>();
  m.cols = j["cols"].get<std::size_t>();
  m.weights = doubles_from(j.value("weights", json::array()), "weights");
  m.bias = doubles_from(j.value("bias", json::array()), "bias");
  try {
    m.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return m;
}

json function_to(const CpwlFunction& f);

json partition_to(const ExplicitPartition& p) {
  json cells = json::array();
  for (std::size_t i = 0; i < p.num_cells(); ++i) {
    json cell{{"normals", p.cell(i).normals},
              {"offsets", p.cell(i).offsets},
              {"map", affine_to(p.map(i))}};
    cells.push_back(std::move(cell));
  }
  return json{{"kind", "partition"},
              {"box_lo", p.box_lo()},
              {"box_hi", p.box_hi()},
              {"cells", std::move(cells)}};
}

json relu_to(const ReluNet& r) {
  json layers = json::array();
  for (const AffineMap& l : r.layers()) layers.push_back(affine_to(l));
  return json{{"kind", "relu_net"}, {"layers", std::move(layers)}};
}

json function_to(const CpwlFunction& f) {
  if (const auto* p = dynamic_cast<const ExplicitPartition*>(&f))
    return partition_to(*p);
  if (const auto* r = dynamic_cast<const ReluNet*>(&f)) return relu_to(*r);
  if (const auto* a = dynamic_cast<const AffinePrecompose*>(&f))
    return json{{"kind", "precompose"},
                {"map", affine_to(a->pre())},
                {"base", function_to(a->base())}};
  if (const auto* s = dynamic_cast<const SymmetrizedFunction*>(&f))
    return json{{"kind", "symmetrized"},
                {"arity", s->arity()},
                {"base", function_to(s->base())}};
  raise(Errc::invalid_argument, "json: unsupported function kind");
}

std::shared_ptr<CpwlFunction> function_from(const json& j) {
  if (!j.is_object() || !j.contains("kind")) bad("function needs a kind");
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "partition") {
      if (!j.contains("cells") || !j["cells"].is_array() || j["cells"].empty())
        bad("partition needs cells");
      std::vector<HPolytope> cells;
      std::vector<AffineMap> maps;
      for (const auto& c : j["cells"]) {
        HPolytope h;
        if (!c.contains("normals") || !c["normals"].is_array())
          bad("cell needs normals");
        for (const auto& n : c["normals"])
          h.normals.push_back(doubles_from(n, "normal"));
        h.offsets = doubles_from(c.value("offsets", json::array()), "offsets");
        cells.push_back(std::move(h));
        maps.push_back(affine_from(c.value("map", json())));
      }
      return std::make_shared<ExplicitPartition>(
          std::move(cells), std::move(maps),
          doubles_from(j.value("box_lo", json::array()), "box_lo"),
          doubles_from(j.value("box_hi", json::array()), "box_hi"));
    }
    if (kind == "relu_net") {
      if (!j.contains("layers") || !j["layers"].is_array() ||
          j["layers"].empty())
        bad("relu net needs layers");
      std::vector<AffineMap> layers;
      for (const auto& l : j["layers"]) layers.push_back(affine_from(l));
      return std::make_shared<ReluNet>(std::move(layers));
    }
    if (kind == "precompose") {
      return std::make_shared<AffinePrecompose>(
          function_from(j.value("base", json())),
          affine_from(j.value("map", json())));
    }
    if (kind == "symmetrized") {
      if (!j.contains("arity")) bad("symmetrized needs arity");
      return std::make_shared<SymmetrizedFunction>(
          function_from(j.value("base", json())),
          j["arity"].get<std::size_t>());
    }
  } catch (const Error& e) {
    if (e.code() == Errc::parse_failure) throw;
    bad(e.what());
  }
  bad("unknown function kind '" + kind + "'");
}

json region_to(const RegionId& id) { return json(id.key); }

RegionId region_from(const json& j) {
  if (!j.is_array()) bad("region id must be an array");
  RegionId id;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad("region id must hold integers");
    id.key.push_back(v.get<std::int32_t>());
  }
  return id;
}

json nested_to(const NestedPointCertificate& c) {
  return json{{"base", c.base},       {"eps", c.eps},
              {"v_chain", c.v_chain}, {"ratio", c.ratio},
              {"offsets", c.offsets}, {"w", c.w},
              {"region", region_to(c.region)}};
}

NestedPointCertificate nested_from(const json& j) {
  if (!j.is_object()) bad("nested certificate must be an object");
  NestedPointCertificate c;
  if (!j.contains("base") || !j["base"].is_number()) bad("nested needs base");
  c.base = j["base"].get<double>();
  c.eps = doubles_from(j.value("eps", json::array()), "eps");
  if (!j.contains("v_chain") || !j["v_chain"].is_array())
    bad("nested needs v_chain");
  for (const auto& v : j["v_chain"])
    c.v_chain.push_back(doubles_from(v, "v_chain entry"));
  if (!j.contains("ratio") || !j["ratio"].is_number()) bad("nested needs ratio");
  c.ratio = j["ratio"].get<double>();
  c.offsets = doubles_from(j.value("offsets", json::array()), "offsets");
  c.w = doubles_from(j.value("w", json::array()), "w");
  c.region = region_from(j.value("region", json::array()));
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io_failure, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), Errc::io_failure, "read failed on '" + path + "'");
  return std::move(buf).str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::io_failure, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  require(out.good(), Errc::io_failure, "write failed on '" + path + "'");
}

// ---------------------------------------------------------------------------
// xyz

std::vector<XyzRecord> parse_xyz(std::istream& in) {
  std::vector<XyzRecord> records;
  std::string line;
  std::size_t lineno = 0;

  auto next_line = [&](bool skip_blank) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (skip_blank) {
        bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
        if (blank) continue;
      }
      return true;
    }
    return false;
  };

  while (next_line(/*skip_blank=*/true)) {
    std::istringstream head(line);
    long long natoms = -1;
    head >> natoms;
    require(head && natoms >= 1, Errc::parse_failure,
            "xyz: bad atom count at line " + std::to_string(lineno));

    require(static_cast<bool>(std::getline(in, line)), Errc::parse_failure,
            "xyz: missing comment line after line " + std::to_string(lineno));
    ++lineno;

    XyzRecord rec;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rec.comment = line;

    std::vector<Point> pts;
    for (long long i = 0; i < natoms; ++i) {
      require(next_line(/*skip_blank=*/false), Errc::parse_failure,
              "xyz: truncated frame, expected " + std::to_string(natoms) +
                  " atoms");
      std::istringstream row(line);
      std::string label;
      double x = 0, y = 0, z = 0;
      row >> label >> x >> y >> z;
      require(static_cast<bool>(row), Errc::parse_failure,
              "xyz: bad atom line at line " + std::to_string(lineno));
      rec.labels.push_back(label);
      pts.push_back({x, y, z});
    }
    rec.points = Multiset(3, std::move(pts));
    records.push_back(std::move(rec));
  }
  require(!records.empty(), Errc::parse_failure, "xyz: no frames found");
  return records;
}

std::vector<XyzRecord> load_xyz(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io_failure, "cannot open '" + path + "' for reading");
  return parse_xyz(in);
}

// ---------------------------------------------------------------------------
// Histogram

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  require(!values.empty(), Errc::invalid_argument, "histogram: no values");
  require(bins >= 1, Errc::invalid_argument, "histogram: need >= 1 bin");
  Histogram h;
  h.total = values.size();
  h.min_value = values[0];
  h.max_value = values[0];
  double sum = 0.0;
  for (double v : values) {
    require(std::isfinite(v), Errc::invalid_argument,
            "histogram: non-finite value");
    h.min_value = std::min(h.min_value, v);
    h.max_value = std::max(h.max_value, v);
    sum += v;
  }
  h.mean = sum / static_cast<double>(values.size());

  const double span =
      h.max_value > h.min_value ? h.max_value - h.min_value : 1.0;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges[b] =
        h.min_value + span * static_cast<double>(b) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto idx = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(bins - 1),
                         std::max(0.0, (v - h.min_value) / span *
                                           static_cast<double>(bins))));
    ++h.counts[idx];
  }
  return h;
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
  std::ostringstream os;
  os.precision(17);
  os << "# format_version=" << kFormatVersion << " min=" << h.min_value
     << " max=" << h.max_value << " mean=" << h.mean << " total=" << h.total
     << "\n";
  os << "lo,hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    os << h.edges[b] << "," << h.edges[b + 1] << "," << h.counts[b] << "\n";
  write_text_file(path, os.str());
}

void write_histogram_svg(const Histogram& h, const std::string& path,
                         const std::string& title) {
  const int W = 640, H = 400, mL = 60, mB = 40, mT = 30, mR = 20;
  std::size_t peak = 1;
  for (std::size_t c : h.counts) peak = std::max(peak, c);

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
     << H << "'>\n";
  os << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
  os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' "
        "font-family='sans-serif' font-size='14'>"
     << title << "</text>\n";
  const double plot_w = W - mL - mR, plot_h = H - mT - mB;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double x = mL + plot_w * static_cast<double>(b) /
                              static_cast<double>(h.counts.size());
    const double bw = plot_w / static_cast<double>(h.counts.size());
    const double frac =
        static_cast<double>(h.counts[b]) / static_cast<double>(peak);
    const double bh = plot_h * frac;
    os << "<rect x='" << x << "' y='" << (mT + plot_h - bh) << "' width='"
       << bw * 0.92 << "' height='" << bh << "' fill='#4477aa'/>\n";
  }
  os << "<line x1='" << mL << "' y1='" << (mT + plot_h) << "' x2='" << (W - mR)
     << "' y2='" << (mT + plot_h) << "' stroke='black'/>\n";
  os << "<line x1='" << mL << "' y1='" << mT << "' x2='" << mL << "' y2='"
     << (mT + plot_h) << "' stroke='black'/>\n";
  os.precision(4);
  os << "<text x='" << mL << "' y='" << (H - 12)
     << "' font-family='sans-serif' font-size='12'>" << h.min_value
     << "</text>\n";
  os << "<text x='" << (W - mR) << "' y='" << (H - 12)
     << "' text-anchor='end' font-family='sans-serif' font-size='12'>"
     << h.max_value << "</text>\n";
  os << "<text x='12' y='" << mT + 4
     << "' font-family='sans-serif' font-size='12'>" << peak << "</text>\n";
  os << "</svg>\n";
  write_text_file(path, os.str());
}

// ---------------------------------------------------------------------------
// JSON forms

std::string multiset_to_json(const Multiset& m) {
  json pts = json::array();
  for (const Point& p : m.elements()) pts.push_back(p);
  return dump(json{{"format_version", kFormatVersion},
                   {"type", "multiset"},
                   {"dim", m.dim()},
                   {"points", std::move(pts)}});
}

Multiset multiset_from_json(const std::string& text) {
  const json j = parse(text);
  expect_header(j, "multiset");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) bad("missing dim");
  const auto dim = j["dim"].get<std::size_t>();
  if (!j.contains("points") || !j["points"].is_array()) bad("missing points");
  std::vector<Point> pts;
  for (const auto& p : j["points"]) pts.push_back(doubles_from(p, "point"));
  try {
    return Multiset(dim, std::move(pts));
  } catch (const Error& e) {
    bad(e.what());
  }
}

std::string function_to_json(const CpwlFunction& f) {
  json j = function_to(f);
  j["format_version"] = kFormatVersion;
  j["type"] = "cpwl_function";
  return dump(j);
}

std::shared_ptr<CpwlFunction> function_from_json(const std::string& text) {
  const json j = parse(text);
  expect_header(j, "cpwl_function");
  return function_from(j);
}

std::string codec_to_json(const GridCodec& c) {
  return dump(json{{"format_version", kFormatVersion},
                   {"type", "grid_codec"},
                   {"separation", c.separation()},
                   {"margin", c.margin()},
                   {"box_lo", c.box_lo()},
                   {"box_hi", c.box_hi()},
                   {"output_dim", c.output_dim()}});
}

GridCodec codec_from_json(const std::string& text) {
  const json j = parse(text);
  expect_header(j, "grid_codec");
  if (!j.contains("separation") || !j["separation"].is_number())
    bad("missing separation");
  GridCodec c = [&] {
    try {
      return GridCodec::build(j["separation"].get<double>(),
                              doubles_from(j.value("box_lo", json::array()),
                                           "box_lo"),
                              doubles_from(j.value("box_hi", json::array()),
                                           "box_hi"),
                              j.value("margin", -1.0));
    } catch (const Error& e) {
      bad(e.what());
    }
  }();
  if (j.contains("output_dim") &&
      j["output_dim"].get<std::size_t>() != c.output_dim())
    bad("output_dim does not match the rebuilt codec");
  return c;
}

std::string encoding_to_json(const GridCodec& c,
                             std::span<const double> values) {
  require(values.size() == c.output_dim(), Errc::size_mismatch,
          "encoding_to_json: value count != codec output dim");
  const json codec = parse(codec_to_json(c));
  return dump(json{{"format_version", kFormatVersion},
                   {"type", "encoding"},
                   {"codec", codec},
                   {"values", std::vector<double>(values.begin(), values.end())}});
}

std::pair<GridCodec, std::vector<double>> encoding_from_json(
    const std::string& text) {
  const json j = parse(text);
  expect_header(j, "encoding");
  if (!j.contains("codec")) bad("encoding needs its codec");
  GridCodec c = codec_from_json(dump(j["codec"]));
  std::vector<double> values =
      doubles_from(j.value("values", json::array()), "values");
  if (values.size() != c.output_dim())
    bad("encoding length does not match the codec");
  return {std::move(c), std::move(values)};
}

std::string certificate_to_json(const CertificateFile& file) {
  const CollisionCertificate& c = file.cert;
  require(file.function != nullptr, Errc::invalid_argument,
          "certificate_to_json: null function");
  json j{{"format_version", kFormatVersion},
         {"type", "collision_certificate"},
         {"library_version", kVersion},
         {"arithmetic", file.exact ? "rational" : "float"},
         {"tolerance", file.tol},
         {"arity", c.arity},
         {"count", c.count},
         {"point_dim", c.point_dim},
         {"function", function_to(*file.function)},
         {"nested", nested_to(c.nested)},
         {"delta", c.delta},
         {"radius", c.radius},
         {"pooled_base", c.pooled_base},
         {"pooled_perturbed", c.pooled_perturbed}};
  if (c.has_lift)
    j["lift"] = json{{"alpha", c.lift_alpha}, {"beta", c.lift_beta}};
  else
    j["lift"] = nullptr;
  if (file.exact) {
    json dx = json::array();
    for (double v : c.delta) {
      const Rational r = to_rational(v);
      dx.push_back(json{{"num", rational_num_str(r)},
                        {"den", rational_den_str(r)}});
    }
    j["delta_exact"] = std::move(dx);
  }
  return dump(j);
}

CertificateFile certificate_from_json(const std::string& text) {
  const json j = parse(text);
  expect_header(j, "collision_certificate");

  CertificateFile file;
  if (!j.contains("function")) bad("certificate needs its function");
  file.function = function_from(j["function"]);
  file.exact = j.value("arithmetic", "float") == std::string("rational");
  file.tol = j.value("tolerance", 1e-9);

  CollisionCertificate& c = file.cert;
  c.arity = j.value("arity", std::size_t{0});
  c.count = j.value("count", std::size_t{0});
  c.point_dim = j.value("point_dim", std::size_t{1});
  c.nested = nested_from(j.value("nested", json()));
  c.delta = doubles_from(j.value("delta", json::array()), "delta");
  if (!j.contains("radius") || !j["radius"].is_number()) bad("missing radius");
  c.radius = j["radius"].get<double>();
  c.pooled_base = doubles_from(j.value("pooled_base", json::array()),
                               "pooled_base");
  c.pooled_perturbed = doubles_from(
      j.value("pooled_perturbed", json::array()), "pooled_perturbed");
  if (j.contains("lift") && !j["lift"].is_null()) {
    c.has_lift = true;
    c.lift_alpha = doubles_from(j["lift"].value("alpha", json::array()),
                                "lift alpha");
    c.lift_beta = doubles_from(j["lift"].value("beta", json::array()),
                               "lift beta");
  }
  if (file.exact) {
    if (!j.contains("delta_exact") || !j["delta_exact"].is_array() ||
        j["delta_exact"].size() != c.delta.size())
      bad("rational certificate needs matching delta_exact");
    for (std::size_t i = 0; i < c.delta.size(); ++i) {
      const auto& e = j["delta_exact"][i];
      const Rational r = rational_from_strings(
          e.value("num", std::string()), e.value("den", std::string("1")));
      if (r != to_rational(c.delta[i]))
        bad("delta_exact disagrees with delta");
    }
  }
  return file;
}

std::string nested_to_json(const NestedPointCertificate& cert,
                           const CpwlFunction& region_source) {
  return dump(json{{"format_version", kFormatVersion},
                   {"type", "nested_certificate"},
                   {"library_version", kVersion},
                   {"region_source", function_to(region_source)},
                   {"nested", nested_to(cert)}});
}

std::pair<NestedPointCertificate, std::shared_ptr<CpwlFunction>>
nested_from_json(const std::string& text) {
  const json j = parse(text);
  expect_header(j, "nested_certificate");
  if (!j.contains("region_source")) bad("nested certificate needs its source");
  return {nested_from(j.value("nested", json())),
          function_from(j["region_source"])};
}

}  // namespace jpool
