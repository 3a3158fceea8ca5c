#include "smot/frame_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace smot {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<DetRecord> read_detection_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");

  std::vector<DetRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(where + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(where + "record must be an object");
    if (!j.contains("frame") || !j["frame"].is_number_integer())
      throw std::runtime_error(where + "missing integer 'frame'");
    if (!j.contains("class") || !j["class"].is_number_integer())
      throw std::runtime_error(where + "missing integer 'class'");
    if (!j.contains("score") || !j["score"].is_number())
      throw std::runtime_error(where + "missing number 'score'");
    if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4)
      throw std::runtime_error(where + "'bbox' must be [x1,y1,x2,y2]");

    DetRecord rec;
    rec.frame = j["frame"].get<int>();
    rec.class_id = j["class"].get<int>();
    rec.score = j["score"].get<double>();
    const auto& b = j["bbox"];
    rec.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                b[3].get<double>()};
    if (j.contains("track") && !j["track"].is_null())
      rec.track = j["track"].get<int>();
    if (j.contains("cube_id") && !j["cube_id"].is_null())
      rec.cube_id = j["cube_id"].get<std::string>();

    if (rec.score < 0.0 || rec.score > 1.0)
      throw std::runtime_error(where + "score out of range [0,1]");
    if (!rec.bbox.valid())
      throw std::runtime_error(where + "bbox not ordered (x1<=x2, y1<=y2)");
    records.push_back(std::move(rec));
  }
  return records;
}

void write_detection_records(std::span<const DetRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  for (const DetRecord& rec : records) {
    json j{{"frame", rec.frame},
           {"class", rec.class_id},
           {"score", rec.score},
           {"bbox", {rec.bbox.x_min, rec.bbox.y_min, rec.bbox.x_max, rec.bbox.y_max}}};
    if (rec.track) j["track"] = *rec.track;
    if (rec.cube_id) j["cube_id"] = *rec.cube_id;
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error(path + ": short write");
}

std::string frame_file_name(int frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.ppm", frame_index);
  return buf;
}

std::vector<FrameRecord> load_frames(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");

  std::map<int, fs::path> by_index;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ppm") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || stem.find_first_not_of("0123456789") != std::string::npos)
      continue;
    by_index[std::stoi(stem)] = entry.path();
  }
  if (by_index.empty()) throw std::runtime_error(dir + ": no numbered .ppm frames");

  std::vector<FrameRecord> frames;
  frames.reserve(by_index.size());
  int expected = 1;
  for (const auto& [index, path] : by_index) {
    if (index != expected)
      throw std::runtime_error(dir + ": missing frame " + std::to_string(expected));
    ++expected;
    FrameRecord rec{index, read_ppm(path.string())};
    if (!frames.empty() && !rec.image.same_shape(frames.front().image))
      throw std::runtime_error(path.string() + ": frame dimensions differ");
    frames.push_back(std::move(rec));
  }
  return frames;
}

}  // namespace smot
