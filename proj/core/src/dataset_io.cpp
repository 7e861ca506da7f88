#include "rio/dataset_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace rio {

namespace {

std::string format_stamp(double stamp) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9f", stamp);
  return buf;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& expected_header)
      : path_(path), in_(path) {
    if (!in_) throw std::runtime_error(path + ": cannot open file");
    std::string header;
    if (!std::getline(in_, header)) {
      throw std::runtime_error(path + ":1: empty file, expected header '" +
                               expected_header + "'");
    }
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header) {
      throw std::runtime_error(path + ":1: unexpected header '" + header +
                               "', expected '" + expected_header + "'");
    }
    lineno_ = 1;
  }

  bool next(std::vector<std::string>* fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields->clear();
      std::istringstream ss(line);
      std::string item;
      while (std::getline(ss, item, ',')) fields->push_back(item);
      if (!line.empty() && line.back() == ',') fields->push_back("");
      return true;
    }
    return false;
  }

  double number(const std::string& field) const {
    try {
      size_t used = 0;
      const double v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(where() + ": malformed number '" + field + "'");
    }
  }

  int integer(const std::string& field) const {
    return static_cast<int>(number(field));
  }

  bool flag(const std::string& field) const {
    if (field == "1") return true;
    if (field == "0") return false;
    throw std::runtime_error(where() + ": malformed flag '" + field + "' (expected 0/1)");
  }

  void expect_fields(const std::vector<std::string>& fields, size_t n) const {
    if (fields.size() != n) {
      throw std::runtime_error(where() + ": expected " + std::to_string(n) +
                               " fields, got " + std::to_string(fields.size()));
    }
  }

  std::string where() const { return path_ + ":" + std::to_string(lineno_); }

 private:
  std::string path_;
  std::ifstream in_;
  int lineno_ = 0;
};

constexpr const char* kImuHeader = "stamp,gx,gy,gz,ax,ay,az";
constexpr const char* kOslHeader = "stamp,qw,qx,qy,qz,px,py,pz";
constexpr const char* kUwbHeader = "stamp,node_id,antenna_id,anchor_id,range,snr_ok,edge_ok";
constexpr const char* kAnchorHeader = "anchor_id,x,y,z";
constexpr const char* kGtHeader = "stamp,qw,qx,qy,qz,px,py,pz,vx,vy,vz";
constexpr const char* kSurveyHeader = "anchor_i,anchor_j,distance,stamp";

std::vector<ImuSample> load_imu_csv(const std::string& path) {
  CsvReader reader(path, kImuHeader);
  std::vector<ImuSample> out;
  std::vector<std::string> f;
  while (reader.next(&f)) {
    reader.expect_fields(f, 7);
    ImuSample s;
    s.stamp = reader.number(f[0]);
    s.gyro = Vec3(reader.number(f[1]), reader.number(f[2]), reader.number(f[3]));
    s.accel = Vec3(reader.number(f[4]), reader.number(f[5]), reader.number(f[6]));
    out.push_back(s);
  }
  return out;
}

std::vector<OslPoseRecord> load_osl_csv(const std::string& path) {
  CsvReader reader(path, kOslHeader);
  std::vector<OslPoseRecord> out;
  std::vector<std::string> f;
  while (reader.next(&f)) {
    reader.expect_fields(f, 8);
    OslPoseRecord rec;
    rec.stamp = reader.number(f[0]);
    rec.q = Quat(reader.number(f[1]), reader.number(f[2]), reader.number(f[3]),
                 reader.number(f[4]));
    rec.q.normalize();
    rec.p = Vec3(reader.number(f[5]), reader.number(f[6]), reader.number(f[7]));
    out.push_back(rec);
  }
  return out;
}

std::vector<UwbRangeRecord> load_uwb_csv(const std::string& path) {
  CsvReader reader(path, kUwbHeader);
  std::vector<UwbRangeRecord> out;
  std::vector<std::string> f;
  while (reader.next(&f)) {
    reader.expect_fields(f, 7);
    UwbRangeRecord rec;
    rec.stamp = reader.number(f[0]);
    rec.node = reader.integer(f[1]);
    rec.antenna = f[2];
    rec.anchor = reader.integer(f[3]);
    rec.range = reader.number(f[4]);
    rec.snr_ok = reader.flag(f[5]);
    rec.edge_ok = reader.flag(f[6]);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<GroundTruthRecord> load_gt_csv(const std::string& path) {
  CsvReader reader(path, kGtHeader);
  std::vector<GroundTruthRecord> out;
  std::vector<std::string> f;
  while (reader.next(&f)) {
    reader.expect_fields(f, 11);
    GroundTruthRecord rec;
    rec.stamp = reader.number(f[0]);
    rec.q = Quat(reader.number(f[1]), reader.number(f[2]), reader.number(f[3]),
                 reader.number(f[4]));
    rec.q.normalize();
    rec.p = Vec3(reader.number(f[5]), reader.number(f[6]), reader.number(f[7]));
    rec.v = Vec3(reader.number(f[8]), reader.number(f[9]), reader.number(f[10]));
    out.push_back(rec);
  }
  return out;
}

}  // namespace

Dataset to_dataset(const SimDataset& data) {
  Dataset out;
  out.imu = data.imu;
  out.osl = data.osl;
  out.uwb = data.uwb;
  out.anchors = data.anchors;
  out.ground_truth = data.ground_truth;
  out.has_uwb = !data.uwb.empty();
  out.has_anchors = !data.anchors.positions.empty();
  out.has_ground_truth = !data.ground_truth.empty();
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  fs::rename(tmp, path);
}

Dataset load_dataset(const std::string& dir) {
  Dataset data;
  const fs::path root(dir);
  if (!fs::is_directory(root)) {
    throw std::runtime_error(dir + ": dataset directory does not exist");
  }

  data.imu = load_imu_csv((root / "imu.csv").string());

  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("osl_", 0) == 0 && entry.path().extension() == ".csv") {
      const std::string stream = name.substr(4, name.size() - 8);
      data.osl[stream] = load_osl_csv(entry.path().string());
    }
  }

  if (fs::exists(root / "uwb.csv")) {
    data.uwb = load_uwb_csv((root / "uwb.csv").string());
    data.has_uwb = true;
  }
  if (fs::exists(root / "anchors.csv")) {
    data.anchors = load_anchors_csv((root / "anchors.csv").string());
    data.has_anchors = true;
  }
  if (fs::exists(root / "groundtruth.csv")) {
    data.ground_truth = load_gt_csv((root / "groundtruth.csv").string());
    data.has_ground_truth = true;
  }
  return data;
}

void write_dataset(const std::string& dir, const SimDataset& data) {
  const fs::path root(dir);
  fs::create_directories(root);

  {
    std::ostringstream out;
    out << kImuHeader << "\n";
    for (const auto& s : data.imu) {
      out << format_stamp(s.stamp) << ',' << format_value(s.gyro.x()) << ','
          << format_value(s.gyro.y()) << ',' << format_value(s.gyro.z()) << ','
          << format_value(s.accel.x()) << ',' << format_value(s.accel.y()) << ','
          << format_value(s.accel.z()) << "\n";
    }
    write_file_atomic((root / "imu.csv").string(), out.str());
  }

  for (const auto& [name, stream] : data.osl) {
    std::ostringstream out;
    out << kOslHeader << "\n";
    for (const auto& rec : stream) {
      out << format_stamp(rec.stamp) << ',' << format_value(rec.q.w()) << ','
          << format_value(rec.q.x()) << ',' << format_value(rec.q.y()) << ','
          << format_value(rec.q.z()) << ',' << format_value(rec.p.x()) << ','
          << format_value(rec.p.y()) << ',' << format_value(rec.p.z()) << "\n";
    }
    write_file_atomic((root / ("osl_" + name + ".csv")).string(), out.str());
  }

  {
    std::ostringstream out;
    out << kUwbHeader << "\n";
    for (const auto& rec : data.uwb) {
      out << format_stamp(rec.stamp) << ',' << rec.node << ',' << rec.antenna << ','
          << rec.anchor << ',' << format_value(rec.range) << ',' << (rec.snr_ok ? 1 : 0)
          << ',' << (rec.edge_ok ? 1 : 0) << "\n";
    }
    write_file_atomic((root / "uwb.csv").string(), out.str());
  }

  write_anchors_csv((root / "anchors.csv").string(), data.anchors);

  {
    std::ostringstream out;
    out << kGtHeader << "\n";
    for (const auto& rec : data.ground_truth) {
      out << format_stamp(rec.stamp) << ',' << format_value(rec.q.w()) << ','
          << format_value(rec.q.x()) << ',' << format_value(rec.q.y()) << ','
          << format_value(rec.q.z()) << ',' << format_value(rec.p.x()) << ','
          << format_value(rec.p.y()) << ',' << format_value(rec.p.z()) << ','
          << format_value(rec.v.x()) << ',' << format_value(rec.v.y()) << ','
          << format_value(rec.v.z()) << "\n";
    }
    write_file_atomic((root / "groundtruth.csv").string(), out.str());
  }
}

TrajectoryData load_trajectory_csv(const std::string& path) {
  // Peek at the header to accept both pose-only and pose+velocity files.
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error(path + ": cannot open file");
  std::string header;
  std::getline(probe, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  probe.close();

  TrajectoryData data;
  if (header == kGtHeader) {
    data.points = load_gt_csv(path);
    data.has_velocity = true;
  } else if (header == kOslHeader) {
    for (const auto& rec : load_osl_csv(path)) {
      data.points.push_back({rec.stamp, rec.q, rec.p, Vec3::Zero()});
    }
    data.has_velocity = false;
  } else {
    throw std::runtime_error(path + ":1: unexpected trajectory header '" + header + "'");
  }
  return data;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<GroundTruthRecord>& points) {
  std::ostringstream out;
  out << kGtHeader << "\n";
  for (const auto& rec : points) {
    out << format_stamp(rec.stamp) << ',' << format_value(rec.q.w()) << ','
        << format_value(rec.q.x()) << ',' << format_value(rec.q.y()) << ','
        << format_value(rec.q.z()) << ',' << format_value(rec.p.x()) << ','
        << format_value(rec.p.y()) << ',' << format_value(rec.p.z()) << ','
        << format_value(rec.v.x()) << ',' << format_value(rec.v.y()) << ','
        << format_value(rec.v.z()) << "\n";
  }
  write_file_atomic(path, out.str());
}

std::vector<SurveyRangeRecord> load_survey_csv(const std::string& path) {
  CsvReader reader(path, kSurveyHeader);
  std::vector<SurveyRangeRecord> out;
  std::vector<std::string> f;
  while (reader.next(&f)) {
    reader.expect_fields(f, 4);
    SurveyRangeRecord rec;
    rec.anchor_i = reader.integer(f[0]);
    rec.anchor_j = reader.integer(f[1]);
    rec.distance = reader.number(f[2]);
    rec.stamp = reader.number(f[3]);
    out.push_back(rec);
  }
  return out;
}

void write_survey_csv(const std::string& path,
                      const std::vector<SurveyRangeRecord>& records) {
  std::ostringstream out;
  out << kSurveyHeader << "\n";
  for (const auto& rec : records) {
    out << rec.anchor_i << ',' << rec.anchor_j << ',' << format_value(rec.distance)
        << ',' << format_stamp(rec.stamp) << "\n";
  }
  write_file_atomic(path, out.str());
}

AnchorMap load_anchors_csv(const std::string& path) {
  CsvReader reader(path, kAnchorHeader);
  AnchorMap map;
  std::vector<std::string> f;
  while (reader.next(&f)) {
    reader.expect_fields(f, 4);
    map.positions[reader.integer(f[0])] =
        Vec3(reader.number(f[1]), reader.number(f[2]), reader.number(f[3]));
  }
  return map;
}

void write_anchors_csv(const std::string& path, const AnchorMap& map) {
  std::ostringstream out;
  out << kAnchorHeader << "\n";
  for (const auto& [id, pos] : map.positions) {
    out << id << ',' << format_value(pos.x()) << ',' << format_value(pos.y()) << ','
        << format_value(pos.z()) << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace rio
