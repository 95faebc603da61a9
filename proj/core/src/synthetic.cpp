#include "benthoscan/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "benthoscan/csv.hpp"
#include "benthoscan/error.hpp"
#include "benthoscan/image_io.hpp"
#include "benthoscan/rottnest.hpp"

namespace benthoscan {

const std::vector<SurveyClassRow>& rottnest_class_rows() {
  static const std::vector<SurveyClassRow> rows = {
      {"AUC", 1, 0},        {"AUS", 0, 1},        {"BMC", 2, 0},
      {"BRYH", 483, 294},   {"BRYS", 20, 13},     {"CB", 20, 0},
      {"CBBF", 1, 0},       {"CBBH", 2, 0},       {"CBOT", 7, 0},
      {"CNHYC", 0, 3},      {"CNHYD", 3, 0},      {"CSBL", 7, 1},
      {"CSBR", 44, 19},     {"CSBRBL", 1, 1},     {"CSCOLBL", 15, 3},
      {"CSCOR", 2, 0},      {"CSCORBL", 2, 2},    {"CSDBL", 7, 3},
      {"CSE", 265, 38},     {"CSEBL", 24, 1},     {"CSF", 887, 355},
      {"CSFBL", 46, 2},     {"CSM", 7, 3},        {"CSSO", 50, 8},
      {"CSSOBL", 1, 0},     {"CSST", 0, 2},       {"CSSUBL", 1, 0},
      {"CST", 1, 1},        {"CSTBL", 1, 0},      {"EF", 10, 7},
      {"ESC", 47, 2},       {"ESS", 15, 1},       {"FELR", 102, 31},
      {"MAAG", 0, 3},       {"MAAR", 2644, 2561}, {"MACAU", 37, 0},
      {"MAECB", 66, 113},   {"MAECG", 1, 1},      {"MAECK", 112762, 43014},
      {"MAECR", 2419, 1124},{"MAEFB", 1733, 173}, {"MAEFG", 1, 1},
      {"MAEFR", 2839, 586}, {"MAENB", 6744, 1300},{"MAENR", 29948, 11686},
      {"MAFR", 1252, 2073}, {"MAGB", 2, 0},       {"MAGG", 9, 0},
      {"MAGR", 1, 0},       {"MALAB", 4, 0},      {"MALAR", 2, 0},
      {"MALCB", 285, 87},   {"MAPAD", 3, 1},      {"MASAR", 1177, 2391},
      {"MASB", 52, 6},      {"MASCY", 16571, 3366},{"MASR", 137, 0},
      {"MATM", 24637, 4846},{"RH", 2, 0},         {"SC", 1505, 163},
      {"SCC", 14, 13},      {"SEAGSAA", 2, 0},    {"SEAGSAG", 18, 3},
      {"SEAGSPA", 0, 3},    {"SEAGSPC", 1, 3},    {"SEAGSPS", 2, 0},
      {"SEAGSZ", 1, 0},     {"SHAD", 106, 15},    {"SPC", 2013, 1201},
      {"SPCL", 400, 214},   {"SPEB", 110, 125},   {"SPEL", 123, 36},
      {"SPES", 289, 347},   {"SPM", 69, 0},       {"SUPBC", 23, 6},
      {"SUPBR", 164, 4},    {"SUS", 9340, 1893},  {"UNK", 68, 1},
  };
  return rows;
}

namespace {

bool is_macroalgae(const std::string& code) {
  return code.rfind("MA", 0) == 0;
}

struct GroupDef {
  const char* name;
  std::vector<const char*> prefixes;
};

nlohmann::json leaf(const std::string& node_id, const std::string& code) {
  return {{"node_id", node_id}, {"code", code}, {"name", code}};
}

nlohmann::json build_taxonomy_doc() {
  std::vector<std::string> ma_codes;
  std::vector<std::string> other_codes;
  for (const auto& row : rottnest_class_rows()) {
    std::string code = row.code;
    if (code == kKelpCode) continue;
    (is_macroalgae(code) ? ma_codes : other_codes).push_back(code);
  }

  nlohmann::json kelp = {{"node_id", "1.1.1"},
                         {"code", kKelpCode},
                         {"name", "Kelp (Ecklonia radiata)"}};

  nlohmann::json other_ma = {{"node_id", "1.1.2"},
                             {"name", "Other macroalgae"},
                             {"children", nlohmann::json::array()}};
  for (std::size_t i = 0; i < ma_codes.size(); ++i)
    other_ma["children"].push_back(
        leaf("1.1.2." + std::to_string(i + 1), ma_codes[i]));

  nlohmann::json macroalgae = {{"node_id", "1.1"},
                               {"name", "Macroalgae"},
                               {"children", {kelp, other_ma}}};

  // Non-macroalgae codes grouped by prefix. The survey scheme does not
  // publish this part of the tree, so the grouping names are neutral labels,
  // not official ones.
  static const std::vector<GroupDef> groups = {
      {"Ascidians (AU)", {"AU"}},
      {"Biological matrix (BM)", {"BM"}},
      {"Bryozoa (BRY)", {"BRY"}},
      {"Cnidarians (CB/CN)", {"CB", "CN"}},
      {"Corals (CS)", {"CS"}},
      {"Echinoderms (E)", {"EF", "ES"}},
      {"Fishes (FE)", {"FE"}},
      {"Rhodoliths (RH)", {"RH"}},
      {"Sessile cover (SC)", {"SC"}},
      {"Seagrasses (SEAG)", {"SEAG"}},
      {"Shadow (SHAD)", {"SHAD"}},
      {"Sponges (SP)", {"SP"}},
      {"Substrate (SU)", {"SU"}},
      {"Unknown (UNK)", {"UNK"}},
  };

  nlohmann::json non_ma = {{"node_id", "1.2"},
                           {"name", "Non-macroalgae"},
                           {"children", nlohmann::json::array()}};
  std::size_t group_index = 0;
  std::set<std::string> placed;
  for (const auto& group : groups) {
    std::vector<std::string> members;
    for (const auto& code : other_codes) {
      if (placed.count(code)) continue;
      for (const char* prefix : group.prefixes) {
        if (code.rfind(prefix, 0) == 0) {
          members.push_back(code);
          break;
        }
      }
    }
    if (members.empty()) continue;
    ++group_index;
    std::string group_id = "1.2." + std::to_string(group_index);
    nlohmann::json node = {{"node_id", group_id},
                           {"name", group.name},
                           {"children", nlohmann::json::array()}};
    for (std::size_t i = 0; i < members.size(); ++i) {
      node["children"].push_back(
          leaf(group_id + "." + std::to_string(i + 1), members[i]));
      placed.insert(members[i]);
    }
    non_ma["children"].push_back(std::move(node));
  }
  for (const auto& code : other_codes) {
    if (!placed.count(code))
      raise(Errc::config_error, "survey code " + code + " not grouped");
  }

  return {{"node_id", "1"},
          {"name", "Biota"},
          {"children", {macroalgae, non_ma}}};
}

}  // namespace

const std::string& default_taxonomy_json() {
  static const std::string text = build_taxonomy_doc().dump(2) + "\n";
  return text;
}

// ---------------------------------------------------------------------------
// Synthetic mosaic dataset

const std::vector<SyntheticTileClass>& synthetic_palette() {
  static const std::vector<SyntheticTileClass> palette = {
      {"MAECK", {139, 69, 19}},   // kelp, brown
      {"MAENR", {160, 40, 60}},   // red macroalgae
      {"MASCY", {120, 130, 40}},  // olive macroalgae
      {"SPC", {230, 140, 30}},    // sponge, orange
      {"CSF", {150, 60, 160}},    // coral, purple
  };
  return palette;
}

namespace {

constexpr std::array<std::uint8_t, 3> kBlack = {0, 0, 0};
constexpr std::array<std::uint8_t, 3> kWhite = {255, 255, 255};

void fill_tile(RgbImage& image, int tile_x, int tile_y,
               const std::array<std::uint8_t, 3>& rgb) {
  for (int c = 0; c < 3; ++c) {
    float v = float(rgb[std::size_t(c)]) / 255.0f;
    for (int y = 0; y < kPatchSize; ++y)
      for (int x = 0; x < kPatchSize; ++x)
        image.at(c, tile_y * kPatchSize + y, tile_x * kPatchSize + x) = v;
  }
}

}  // namespace

SyntheticDataset make_synthetic(const SyntheticOptions& options) {
  if (options.images < 2)
    raise(Errc::config_error, "need at least 2 synthetic images");

  const auto& palette = synthetic_palette();
  SyntheticDataset out;
  int side = 2 * kPatchSize;

  for (int i = 0; i < options.images; ++i) {
    SurveyImage meta;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%03d", i);
    meta.image_id = id;
    meta.file_path = "images/" + meta.image_id + ".png";
    meta.site_id = i < options.images / 2 ? "site-N" : "site-S";
    meta.year = (i % 2 == 0) ? 2010 : 2013;
    meta.depth_m = 15.0 + 10.0 * double(i % 3);
    meta.width_px = side;
    meta.height_px = side;

    RgbImage image(side, side);
    // tiles indexed ty*2+tx: 0 black anchor, 1..2 palette, 3 white anchor
    fill_tile(image, 0, 0, kBlack);
    const auto& class_a = palette[std::size_t(2 * i) % palette.size()];
    const auto& class_b = palette[std::size_t(2 * i + 1) % palette.size()];
    fill_tile(image, 1, 0, class_a.rgb);
    fill_tile(image, 0, 1, class_b.rgb);
    fill_tile(image, 1, 1, kWhite);

    auto add_point = [&](int tile_x, int tile_y, const std::string& code) {
      PointLabel label;
      label.image_id = meta.image_id;
      label.x_px = tile_x * kPatchSize + kPatchHalf;
      label.y_px = tile_y * kPatchSize + kPatchHalf;
      label.class_code = code;
      out.dataset.labels.push_back(std::move(label));
    };
    add_point(0, 0, "SHAD");
    add_point(1, 0, class_a.code);
    add_point(0, 1, class_b.code);
    add_point(1, 1, "SUS");

    out.dataset.images.push_back(std::move(meta));
    out.pixels.push_back(std::move(image));
  }
  return out;
}

void write_synthetic(const SyntheticOptions& options,
                     const std::filesystem::path& dir) {
  SyntheticDataset data = make_synthetic(options);
  std::filesystem::create_directories(dir / "images");

  for (std::size_t i = 0; i < data.dataset.images.size(); ++i)
    save_png(data.pixels[i], dir / data.dataset.images[i].file_path);

  std::string images_csv =
      "image_id,file_path,site_id,year,depth_m,width_px,height_px\n";
  for (const auto& image : data.dataset.images) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%s,%s,%d,%.1f,%d,%d\n",
                  image.image_id.c_str(), image.file_path.c_str(),
                  image.site_id.c_str(), image.year, image.depth_m,
                  image.width_px, image.height_px);
    images_csv += line;
  }
  std::ofstream(dir / "images.csv") << images_csv;

  std::string labels_csv = "image_id,x_px,y_px,class_code\n";
  for (const auto& label : data.dataset.labels) {
    char line[128];
    std::snprintf(line, sizeof(line), "%s,%d,%d,%s\n", label.image_id.c_str(),
                  label.x_px, label.y_px, label.class_code.c_str());
    labels_csv += line;
  }
  std::ofstream(dir / "labels.csv") << labels_csv;

  std::ofstream(dir / "taxonomy.json") << default_taxonomy_json();
}

}  // namespace benthoscan
