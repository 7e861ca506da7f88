#pragma once

#include <map>
#include <string>
#include <vector>

#include "rio/anchors.hpp"
#include "rio/imu_types.hpp"
#include "rio/sim.hpp"
#include "rio/types.hpp"

// CSV dataset bundle shared by the simulator, the estimator and the
// evaluation tools. Headers are fixed:
//   imu.csv:          stamp,gx,gy,gz,ax,ay,az
//   osl_<stream>.csv: stamp,qw,qx,qy,qz,px,py,pz
//   uwb.csv:          stamp,node_id,antenna_id,anchor_id,range,snr_ok,edge_ok
//   anchors.csv:      anchor_id,x,y,z
//   groundtruth.csv:  stamp,qw,qx,qy,qz,px,py,pz,vx,vy,vz
// Stamps serialize with 9 decimal places, other values with full round-trip
// precision; files are sorted by stamp and written atomically (tmp + rename).

namespace rio {

struct Dataset {
  std::vector<ImuSample> imu;
  std::map<std::string, std::vector<OslPoseRecord>> osl;
  std::vector<UwbRangeRecord> uwb;
  AnchorMap anchors;
  std::vector<GroundTruthRecord> ground_truth;
  bool has_uwb = false;
  bool has_anchors = false;
  bool has_ground_truth = false;
};

/// Loads a dataset directory. imu.csv is required; uwb.csv, anchors.csv,
/// groundtruth.csv and osl_*.csv are optional. Parse failures throw
/// std::runtime_error naming file and line.
Dataset load_dataset(const std::string& dir);

void write_dataset(const std::string& dir, const SimDataset& data);

/// Pose (8 columns) or pose+velocity (11 columns) trajectory file.
struct TrajectoryData {
  std::vector<GroundTruthRecord> points;
  bool has_velocity = false;
};
TrajectoryData load_trajectory_csv(const std::string& path);
void write_trajectory_csv(const std::string& path,
                          const std::vector<GroundTruthRecord>& points);

std::vector<SurveyRangeRecord> load_survey_csv(const std::string& path);
void write_survey_csv(const std::string& path,
                      const std::vector<SurveyRangeRecord>& records);

AnchorMap load_anchors_csv(const std::string& path);
void write_anchors_csv(const std::string& path, const AnchorMap& map);

/// In-memory view of a simulated dataset (no files involved).
Dataset to_dataset(const SimDataset& data);

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace rio
