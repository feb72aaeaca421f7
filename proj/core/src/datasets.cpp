#include "rnnode/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rnnode/errors.hpp"
#include "rnnode/rng.hpp"

namespace rnnode {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::string_view kCsvTag = "# rnnode-dataset";

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& file) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(file + ": truncated header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

[[noreturn]] void csv_error(const std::string& source, std::size_t line, const std::string& what) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, const std::string& source, std::size_t line) {
  // from_chars for double is unreliable on older libstdc++; strtod on a copy.
  const std::string text(field);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    csv_error(source, line, "invalid number '" + text + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view field, const std::string& source, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    csv_error(source, line, "invalid integer '" + std::string(field) + "'");
  }
  return v;
}

std::string sanitize_name(const std::string& name) {
  std::string out = name.empty() ? "unnamed" : name;
  for (char& c : out) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '=') c = '_';
  }
  return out;
}

}  // namespace

Vector one_hot(std::size_t label, std::size_t num_labels) {
  if (label < 1 || label > num_labels) {
    throw DomainError("label " + std::to_string(label) + " outside 1.." + std::to_string(num_labels));
  }
  Vector v = Vector::Zero(static_cast<Eigen::Index>(num_labels));
  v(static_cast<Eigen::Index>(label - 1)) = 1.0;
  return v;
}

Vector Dataset::label_vector(std::size_t j) const { return one_hot(labels.at(j) + 1, num_labels); }

void Dataset::validate() const {
  if (inputs.size() != labels.size()) {
    throw DimensionError("dataset has " + std::to_string(inputs.size()) + " inputs but " +
                         std::to_string(labels.size()) + " labels");
  }
  if (num_labels == 0) throw DimensionError("dataset must have at least one label");
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (static_cast<std::size_t>(inputs[j].size()) != input_dim) {
      throw DimensionError("datum " + std::to_string(j) + " has length " + std::to_string(inputs[j].size()) +
                           ", expected " + std::to_string(input_dim));
    }
    if (!inputs[j].allFinite()) throw DomainError("datum " + std::to_string(j) + " is not finite");
    if (labels[j] >= num_labels) {
      throw DomainError("datum " + std::to_string(j) + " has label " + std::to_string(labels[j] + 1) +
                        " outside 1.." + std::to_string(num_labels));
    }
  }
}

std::vector<std::array<double, 2>> circle_centers(std::size_t count, double radius) {
  std::vector<std::array<double, 2>> centers;
  for (std::size_t k = 0; k < count; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    centers.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  return centers;
}

Dataset gen_blobs(std::size_t n_per_class, const std::vector<std::array<double, 2>>& centers, double sigma,
                  std::uint64_t seed) {
  if (centers.size() < 2) throw ConfigError("blobs need at least two centers");
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      if (centers[a] == centers[b]) throw ConfigError("blob centers must be pairwise distinct");
    }
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be nonnegative");

  Rng rng(seed);
  Dataset d;
  d.name = "blobs";
  d.seed = seed;
  d.rng = std::string(Rng::kAlgorithm);
  d.input_dim = 2;
  d.num_labels = centers.size();
  d.inputs.reserve(n_per_class * centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const double dx = rng.normal();
      const double dy = rng.normal();
      Vector x(2);
      x << centers[c][0] + sigma * dx, centers[c][1] + sigma * dy;
      d.inputs.push_back(std::move(x));
      d.labels.push_back(c);
    }
  }
  return d;
}

Dataset gen_two_class(TwoClassKind kind, std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw ConfigError("two-class generator needs n >= 2");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be nonnegative");
  Rng rng(seed);
  Dataset d;
  d.name = kind == TwoClassKind::concentric_rings ? "rings" : "arcs";
  d.seed = seed;
  d.rng = std::string(Rng::kAlgorithm);
  d.input_dim = 2;
  d.num_labels = 2;
  const std::size_t first = (n + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i < first ? 0 : 1;
    Vector x(2);
    if (kind == TwoClassKind::concentric_rings) {
      const double angle = 2.0 * std::numbers::pi * rng.uniform01();
      const double r = (label == 0 ? 1.0 : 2.5) + noise * rng.normal();
      x << r * std::cos(angle), r * std::sin(angle);
    } else {
      const double angle = std::numbers::pi * rng.uniform01();
      if (label == 0) {
        x << std::cos(angle), std::sin(angle);
      } else {
        x << 1.0 - std::cos(angle), 0.5 - std::sin(angle);
      }
      const double nx = rng.normal();
      const double ny = rng.normal();
      x(0) += noise * nx;
      x(1) += noise * ny;
    }
    d.inputs.push_back(std::move(x));
    d.labels.push_back(label);
  }
  return d;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const std::string img_name = images_path.string();
  const std::string lbl_name = labels_path.string();
  const auto images = read_bytes(images_path);
  const auto labels = read_bytes(labels_path);

  const std::uint32_t img_magic = read_be32(images, 0, img_name);
  if (img_magic != kIdxImagesMagic) {
    std::ostringstream msg;
    msg << img_name << ": bad magic 0x" << std::hex << std::setw(8) << std::setfill('0') << img_magic
        << " at offset 0 (expected 0x00000803)";
    throw FormatError(msg.str());
  }
  const std::uint32_t count = read_be32(images, 4, img_name);
  const std::uint32_t rows = read_be32(images, 8, img_name);
  const std::uint32_t cols = read_be32(images, 12, img_name);
  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t expected_img = 16 + std::size_t{count} * pixels;
  if (images.size() < expected_img) {
    throw FormatError(img_name + ": truncated pixel data at offset " + std::to_string(images.size()) +
                      " (expected " + std::to_string(expected_img) + " bytes)");
  }
  if (images.size() > expected_img) {
    throw FormatError(img_name + ": trailing bytes at offset " + std::to_string(expected_img));
  }

  const std::uint32_t lbl_magic = read_be32(labels, 0, lbl_name);
  if (lbl_magic != kIdxLabelsMagic) {
    std::ostringstream msg;
    msg << lbl_name << ": bad magic 0x" << std::hex << std::setw(8) << std::setfill('0') << lbl_magic
        << " at offset 0 (expected 0x00000801)";
    throw FormatError(msg.str());
  }
  const std::uint32_t lbl_count = read_be32(labels, 4, lbl_name);
  if (lbl_count != count) {
    throw FormatError(lbl_name + ": label count " + std::to_string(lbl_count) + " at offset 4 does not match " +
                      std::to_string(count) + " images");
  }
  const std::size_t expected_lbl = 8 + std::size_t{count};
  if (labels.size() != expected_lbl) {
    throw FormatError(lbl_name + ": expected " + std::to_string(expected_lbl) + " bytes, file ends at offset " +
                      std::to_string(labels.size()));
  }

  Dataset d;
  d.name = "idx";
  d.input_dim = pixels;
  d.num_labels = 10;
  d.image_shape = std::make_pair(rows, cols);
  d.inputs.reserve(count);
  d.labels.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const unsigned char* px = images.data() + 16 + j * pixels;
    Vector x(static_cast<Eigen::Index>(pixels));
    for (std::size_t p = 0; p < pixels; ++p) x(static_cast<Eigen::Index>(p)) = px[p] / 255.0;
    const unsigned char digit = labels[8 + j];
    if (digit > 9) {
      throw FormatError(lbl_name + ": label " + std::to_string(digit) + " at offset " + std::to_string(8 + j) +
                        " is not a digit");
    }
    d.inputs.push_back(std::move(x));
    d.labels.push_back(digit);
  }
  return d;
}

void save_idx(const Dataset& dataset, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
  dataset.validate();
  if (dataset.num_labels > 256) throw FormatError("IDX labels are single bytes");
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  if (dataset.image_shape) {
    std::tie(rows, cols) = *dataset.image_shape;
  } else {
    rows = 1;
    cols = static_cast<std::uint32_t>(dataset.input_dim);
  }
  if (std::size_t{rows} * cols != dataset.input_dim) throw DimensionError("image shape does not match input length");

  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lbl(labels_path, std::ios::binary);
  if (!img || !lbl) throw FormatError("cannot open IDX output files");
  write_be32(img, kIdxImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(dataset.size()));
  write_be32(img, rows);
  write_be32(img, cols);
  write_be32(lbl, kIdxLabelsMagic);
  write_be32(lbl, static_cast<std::uint32_t>(dataset.size()));
  std::vector<char> buffer(dataset.input_dim);
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    for (std::size_t p = 0; p < dataset.input_dim; ++p) {
      const double scaled = dataset.inputs[j](static_cast<Eigen::Index>(p)) * 255.0;
      const double level = std::round(scaled);
      if (level < 0.0 || level > 255.0 || std::abs(scaled - level) > 1e-6) {
        throw DomainError("datum " + std::to_string(j) + " pixel " + std::to_string(p) +
                          " is not a multiple of 1/255 in [0,1]");
      }
      buffer[p] = static_cast<char>(static_cast<unsigned char>(level));
    }
    img.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const char label = static_cast<char>(static_cast<unsigned char>(dataset.labels[j]));
    lbl.write(&label, 1);
  }
  if (!img || !lbl) throw FormatError("failed writing IDX files");
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  dataset.validate();
  out << kCsvTag << " name=" << sanitize_name(dataset.name) << " M=" << dataset.input_dim
      << " N=" << dataset.num_labels << " D=" << dataset.size()
      << " seed=" << (dataset.seed ? std::to_string(*dataset.seed) : std::string("none"))
      << " rng=" << (dataset.rng.empty() ? std::string("none") : dataset.rng) << '\n';
  for (std::size_t i = 1; i <= dataset.input_dim; ++i) out << "x_" << i << ',';
  out << "label\n";
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    const Vector& x = dataset.inputs[j];
    for (Eigen::Index i = 0; i < x.size(); ++i) out << format_double(x(i)) << ',';
    out << dataset.labels[j] + 1 << '\n';
  }
}

Dataset read_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kCsvTag, 0) != 0) {
    csv_error(source, 1, "missing '# rnnode-dataset' header");
  }
  Dataset d;
  std::optional<std::size_t> declared_count;
  bool have_m = false;
  bool have_n = false;
  std::istringstream tokens(line.substr(kCsvTag.size()));
  std::string token;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) csv_error(source, 1, "malformed header field '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "name") {
      d.name = value;
    } else if (key == "M") {
      d.input_dim = parse_size(value, source, 1);
      have_m = true;
    } else if (key == "N") {
      d.num_labels = parse_size(value, source, 1);
      have_n = true;
    } else if (key == "D") {
      declared_count = parse_size(value, source, 1);
    } else if (key == "seed") {
      if (value != "none") d.seed = parse_size(value, source, 1);
    } else if (key == "rng") {
      d.rng = value == "none" ? std::string() : value;
    } else {
      csv_error(source, 1, "unknown header field '" + key + "'");
    }
  }
  if (!have_m || !have_n) csv_error(source, 1, "header must declare M and N");
  if (d.num_labels == 0) csv_error(source, 1, "N must be positive");

  if (!std::getline(in, line)) csv_error(source, 2, "missing column header");
  if (split_commas(line).size() != d.input_dim + 1) {
    csv_error(source, 2, "column header does not have M + 1 columns");
  }

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != d.input_dim + 1) {
      csv_error(source, line_no,
                "expected " + std::to_string(d.input_dim + 1) + " columns, found " + std::to_string(fields.size()));
    }
    Vector x(static_cast<Eigen::Index>(d.input_dim));
    for (std::size_t i = 0; i < d.input_dim; ++i) {
      x(static_cast<Eigen::Index>(i)) = parse_double(fields[i], source, line_no);
    }
    const std::size_t label = parse_size(fields.back(), source, line_no);
    if (label < 1 || label > d.num_labels) {
      csv_error(source, line_no, "label " + std::to_string(label) + " outside 1.." + std::to_string(d.num_labels));
    }
    d.inputs.push_back(std::move(x));
    d.labels.push_back(label - 1);
  }
  if (declared_count && *declared_count != d.size()) {
    csv_error(source, line_no,
              "header declares D=" + std::to_string(*declared_count) + " but file has " + std::to_string(d.size()) +
                  " rows");
  }
  return d;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_csv(dataset, out);
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_csv(in, path.string());
}

Dataset take(const Dataset& dataset, std::size_t count) {
  Dataset out = dataset;
  if (count < out.size()) {
    out.inputs.resize(count);
    out.labels.resize(count);
  }
  return out;
}

std::pair<Dataset, Dataset> shuffle_split(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("split fraction must lie in [0, 1]");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(dataset.size())));
  Dataset first = dataset;
  Dataset second = dataset;
  first.inputs.clear();
  first.labels.clear();
  second.inputs.clear();
  second.labels.clear();
  for (std::size_t k = 0; k < order.size(); ++k) {
    Dataset& dst = k < cut ? first : second;
    dst.inputs.push_back(dataset.inputs[order[k]]);
    dst.labels.push_back(dataset.labels[order[k]]);
  }
  return {std::move(first), std::move(second)};
}

}  // namespace rnnode
