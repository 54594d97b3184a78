#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace growl {

inline constexpr double kPi = 3.14159265358979323846;

// Maps an angle into [-pi, pi). Angles already in range are returned unchanged.
double wrap_angle(double radians);

struct Individual {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, counter-clockwise from +x, wrapped

  friend bool operator==(const Individual&, const Individual&) = default;
};

Individual make_individual(std::string id, double x, double y, double theta);

using Group = std::vector<std::string>;

enum class ViewTag { topdown, egocentric_derived };

std::string_view to_string(ViewTag tag);
ViewTag parse_view_tag(std::string_view text);

struct Scene {
  std::string frame_id;
  std::vector<Individual> individuals;
  std::optional<std::vector<Group>> groups;  // ground truth, when annotated
  ViewTag view_tag = ViewTag::topdown;

  const Individual* find(std::string_view id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Dataset {
  std::string name;
  std::string units = "meters";  // "meters" or "normalized"
  std::vector<Scene> scenes;

  const Scene* find(std::string_view frame_id) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Throw ValidationError naming the first broken invariant.
void validate(const Scene& scene);
void validate(const Dataset& dataset);

enum class DatasetFormat { json, csv };

struct CsvOptions {
  // Companion `frame_id,group_index,id` file. When unset, `<stem>.groups.csv`
  // next to the individuals file is used if it exists.
  std::optional<std::filesystem::path> groups_path;
  std::string units = "meters";
  std::string name;  // defaults to the file stem
};

Dataset parse_dataset_json(std::string_view text, std::string_view source = "<memory>");
std::string dataset_to_json(const Dataset& dataset);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const CsvOptions& csv = {});

// JSON writes one self-contained file. CSV writes `path` plus the companion
// groups file at `<stem>.groups.csv`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format);

// Deterministic shuffle under `seed`; the first partition holds
// round(train_fraction * n) scenes. Both partitions keep the original order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);

}  // namespace growl
