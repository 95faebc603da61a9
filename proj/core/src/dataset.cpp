#include "benthoscan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <unordered_map>

#include "benthoscan/csv.hpp"
#include "benthoscan/error.hpp"
#include "benthoscan/util.hpp"

namespace benthoscan {

SplitSpec SplitSpec::location_fraction(double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    raise(Errc::config_error, "split fraction must be in (0,1)");
  SplitSpec spec;
  spec.policy = Policy::by_location_fraction;
  spec.fraction = fraction;
  spec.seed = seed;
  return spec;
}

SplitSpec SplitSpec::by_year(std::set<int> train_years,
                             std::set<int> test_years) {
  for (int y : train_years)
    if (test_years.count(y))
      raise(Errc::config_error,
            "train/test year sets overlap at " + std::to_string(y));
  SplitSpec spec;
  spec.policy = Policy::by_year;
  spec.train_years = std::move(train_years);
  spec.test_years = std::move(test_years);
  return spec;
}

namespace {

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
  raise(Errc::malformed_row, what + " at line " + std::to_string(line));
}

long parse_int(const std::string& field, std::size_t line,
               const char* column) {
  long value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    bad_row(line, std::string("bad integer in column ") + column);
  return value;
}

double parse_double(const std::string& field, std::size_t line,
                    const char* column) {
  try {
    std::size_t used = 0;
    double value = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    bad_row(line, std::string("bad number in column ") + column);
  }
}

void require_header(const CsvTable& table,
                    const std::vector<std::string>& expected,
                    const std::string& path) {
  if (table.header != expected)
    raise(Errc::malformed_row, "unexpected header in " + path);
}

}  // namespace

Dataset parse_manifest(const std::filesystem::path& images_csv,
                       const std::filesystem::path& labels_csv) {
  Dataset dataset;

  CsvTable images = read_csv(images_csv);
  require_header(images,
                 {"image_id", "file_path", "site_id", "year", "depth_m",
                  "width_px", "height_px"},
                 images_csv.string());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < images.rows.size(); ++r) {
    const auto& row = images.rows[r];
    std::size_t line = images.line_numbers[r];
    if (row.size() != 7) bad_row(line, "expected 7 fields");
    SurveyImage image;
    image.image_id = row[0];
    image.file_path = row[1];
    image.site_id = row[2];
    image.year = int(parse_int(row[3], line, "year"));
    image.depth_m = parse_double(row[4], line, "depth_m");
    image.width_px = int(parse_int(row[5], line, "width_px"));
    image.height_px = int(parse_int(row[6], line, "height_px"));
    if (image.image_id.empty()) bad_row(line, "empty image_id");
    if (image.depth_m < 0) bad_row(line, "negative depth_m");
    if (image.width_px <= 0 || image.height_px <= 0)
      bad_row(line, "non-positive image dimensions");
    if (!index.emplace(image.image_id, dataset.images.size()).second)
      raise(Errc::duplicate_image_id,
            image.image_id + " at line " + std::to_string(line));
    dataset.images.push_back(std::move(image));
  }

  CsvTable labels = read_csv(labels_csv);
  require_header(labels, {"image_id", "x_px", "y_px", "class_code"},
                 labels_csv.string());
  std::unordered_map<std::string, int> points_per_image;
  for (std::size_t r = 0; r < labels.rows.size(); ++r) {
    const auto& row = labels.rows[r];
    std::size_t line = labels.line_numbers[r];
    if (row.size() != 4) bad_row(line, "expected 4 fields");
    PointLabel label;
    label.image_id = row[0];
    label.x_px = int(parse_int(row[1], line, "x_px"));
    label.y_px = int(parse_int(row[2], line, "y_px"));
    label.class_code = row[3];
    auto it = index.find(label.image_id);
    if (it == index.end())
      raise(Errc::unknown_image_reference,
            label.image_id + " at line " + std::to_string(line));
    const SurveyImage& image = dataset.images[it->second];
    if (label.x_px < 0 || label.x_px >= image.width_px || label.y_px < 0 ||
        label.y_px >= image.height_px)
      bad_row(line, "point outside image bounds");
    if (label.class_code.empty()) bad_row(line, "empty class_code");
    if (++points_per_image[label.image_id] > kMaxPointsPerImage)
      bad_row(line, "more than " + std::to_string(kMaxPointsPerImage) +
                        " points on image " + label.image_id);
    dataset.labels.push_back(std::move(label));
  }
  return dataset;
}

void validate_codes(const Dataset& dataset, const TaxonomyTree& tree) {
  for (const auto& label : dataset.labels)
    if (!tree.has_code(label.class_code))
      raise(Errc::unknown_node,
            "label class code " + label.class_code + " not in taxonomy");
}

namespace {

Split route_images(const Dataset& dataset,
                   const std::set<std::string>& train_ids) {
  Split out;
  for (const auto& image : dataset.images) {
    (train_ids.count(image.image_id) ? out.train : out.test)
        .images.push_back(image);
  }
  for (const auto& label : dataset.labels) {
    (train_ids.count(label.image_id) ? out.train : out.test)
        .labels.push_back(label);
  }
  return out;
}

}  // namespace

Split split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.images.empty()) raise(Errc::config_error, "empty dataset");

  std::set<std::string> train_ids;
  if (spec.policy == SplitSpec::Policy::by_location_fraction) {
    std::map<std::string, std::vector<std::string>> by_site;
    for (const auto& image : dataset.images)
      by_site[image.site_id].push_back(image.image_id);
    for (auto& [site, ids] : by_site) {
      if (ids.size() < 2)
        raise(Errc::empty_site,
              "site " + site + " has fewer than 2 images");
      // Shuffle a sorted copy so the outcome depends only on (seed, site,
      // image ids), not on manifest row order.
      std::sort(ids.begin(), ids.end());
      std::mt19937_64 rng(mix_seed(spec.seed, site));
      std::shuffle(ids.begin(), ids.end(), rng);
      std::size_t n_train = std::size_t(spec.fraction * double(ids.size()));
      for (std::size_t i = 0; i < n_train; ++i) train_ids.insert(ids[i]);
    }
  } else {
    for (const auto& image : dataset.images) {
      if (spec.train_years.count(image.year)) {
        train_ids.insert(image.image_id);
      } else if (!spec.test_years.count(image.year)) {
        raise(Errc::year_not_covered,
              "image " + image.image_id + " year " +
                  std::to_string(image.year) + " in neither year set");
      }
    }
  }
  return route_images(dataset, train_ids);
}

DatasetSummary summarize(const std::vector<PointLabel>& labels) {
  DatasetSummary summary;
  std::set<std::string> images;
  for (const auto& label : labels) {
    ++summary.per_class[label.class_code];
    images.insert(label.image_id);
  }
  summary.point_count = labels.size();
  summary.image_count = images.size();
  return summary;
}

DatasetSummary summarize(const std::vector<PointLabel>& labels,
                         const TaxonomyTree& tree) {
  DatasetSummary summary = summarize(labels);
  for (const auto& [code, node_id] : tree.code_index) {
    (void)node_id;
    summary.per_class.emplace(code, 0);
  }
  return summary;
}

namespace {
constexpr char kDatasetMagic[4] = {'B', 'S', 'D', 'S'};
constexpr std::uint16_t kDatasetVersion = 1;

void put_string(std::string& out, const std::string& s) {
  put_u32(out, std::uint32_t(s.size()));
  out.append(s);
}
}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::string out;
  out.append(kDatasetMagic, 4);
  put_u16(out, kDatasetVersion);
  put_u32(out, std::uint32_t(dataset.images.size()));
  for (const auto& image : dataset.images) {
    put_string(out, image.image_id);
    put_string(out, image.file_path);
    put_string(out, image.site_id);
    put_i32(out, image.year);
    put_f64(out, image.depth_m);
    put_i32(out, image.width_px);
    put_i32(out, image.height_px);
  }
  put_u32(out, std::uint32_t(dataset.labels.size()));
  for (const auto& label : dataset.labels) {
    put_string(out, label.image_id);
    put_i32(out, label.x_px);
    put_i32(out, label.y_px);
    put_string(out, label.class_code);
  }
  write_file_bytes(path.string(), out);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::string bytes = read_file_bytes(path.string());
  ByteReader reader(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                    bytes.size());
  if (reader.bytes(4) != std::string(kDatasetMagic, 4))
    raise(Errc::io_error, "not a dataset file: " + path.string());
  if (reader.u16() != kDatasetVersion)
    raise(Errc::io_error, "unsupported dataset version in " + path.string());
  Dataset dataset;
  std::uint32_t n_images = reader.u32();
  dataset.images.reserve(n_images);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    SurveyImage image;
    image.image_id = reader.bytes(reader.u32());
    image.file_path = reader.bytes(reader.u32());
    image.site_id = reader.bytes(reader.u32());
    image.year = reader.i32();
    image.depth_m = reader.f64();
    image.width_px = reader.i32();
    image.height_px = reader.i32();
    dataset.images.push_back(std::move(image));
  }
  std::uint32_t n_labels = reader.u32();
  dataset.labels.reserve(n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) {
    PointLabel label;
    label.image_id = reader.bytes(reader.u32());
    label.x_px = reader.i32();
    label.y_px = reader.i32();
    label.class_code = reader.bytes(reader.u32());
    dataset.labels.push_back(std::move(label));
  }
  return dataset;
}

}  // namespace benthoscan
