#include "palmtrack/simio/mot_io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace palmtrack {

namespace {

std::vector<double> parse_row(const std::string& path, int line_no, const std::string& line,
                              std::size_t min_fields) {
  std::vector<double> fields;
  std::stringstream ss(line);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      fields.push_back(std::stod(token, &used));
      while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "malformed field '" + token + "'");
    }
  }
  if (fields.size() < min_fields)
    throw ParseError(path, line_no,
                     "expected at least " + std::to_string(min_fields) + " fields");
  return fields;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<DetectionFrame> read_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::map<int, DetectionFrame> by_frame;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '#') continue;
    const auto f = parse_row(path, line_no, line, 7);
    const int frame = static_cast<int>(f[0]);
    if (frame < 1) throw ParseError(path, line_no, "frame index must be >= 1");
    auto& det = by_frame[frame];
    det.frame = frame;
    det.boxes.push_back(Eigen::Vector4d(f[2], f[3], f[4], f[5]));
    det.confidences.push_back(f[6]);
  }

  std::vector<DetectionFrame> out;
  out.reserve(by_frame.size());
  for (auto& [frame, det] : by_frame) out.push_back(std::move(det));
  return out;
}

void write_detections(const std::string& path, const std::vector<DetectionFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[256];
  for (const auto& det : frames) {
    for (std::size_t i = 0; i < det.boxes.size(); ++i) {
      const auto& b = det.boxes[i];
      const double conf = i < det.confidences.size() ? det.confidences[i] : 1.0;
      std::snprintf(buf, sizeof(buf), "%d,-1,%.6f,%.6f,%.6f,%.6f,%.6f,-1,-1,-1\n", det.frame,
                    b[0], b[1], b[2], b[3], conf);
      out << buf;
    }
  }
}

void write_results(const std::string& path, const TrackOutput& output) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[320];
  for (std::size_t k = 0; k < output.frames.size(); ++k) {
    for (const auto& e : output.frames[k]) {
      const BBox2D box = e.box.value_or(BBox2D{});
      const PedestrianState s = PedestrianState::from_vector(e.state);
      std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    output.frame_numbers[k], e.mark, box.left, box.top, box.width, box.height,
                    e.existence, s.x(), s.y(), s.z());
      out << buf;
    }
  }
}

TrajectorySet read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  TrajectorySet out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '#') continue;
    const auto f = parse_row(path, line_no, line, 6);
    out.add(static_cast<int>(f[1]), static_cast<int>(f[0]), {f[2], f[3], f[4], f[5]});
  }
  return out;
}

TrajectorySet read_gt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  TrajectorySet out;
  std::string line;
  int line_no = 0;
  bool warned = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '#') continue;
    const auto f = parse_row(path, line_no, line, 6);
    if (f.size() >= 8) {
      const int flag = static_cast<int>(f[6]);
      const int cls = static_cast<int>(f[7]);
      if (flag != 1 || cls != 1) continue;  // pedestrian class only
    }
    double visibility = 1.0;
    if (f.size() >= 9) {
      visibility = f[8];
    } else if (!warned) {
      std::cerr << path << ": no visibility column, defaulting to 1\n";
      warned = true;
    }
    out.add(static_cast<int>(f[1]), static_cast<int>(f[0]), {f[2], f[3], f[4], f[5]},
            visibility);
  }
  return out;
}

void write_gt(const std::string& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[320];
  for (int frame = 1; frame <= scenario.num_frames; ++frame) {
    const auto& row = scenario.states[static_cast<std::size_t>(frame - 1)];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!row[i].has_value()) continue;
      const BBox2D box = project_bbox(*row[i], scenario.camera);
      std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%.6f,1,1,%.6f\n", frame,
                    static_cast<int>(i) + 1, box.left, box.top, box.width, box.height,
                    scenario.visibility[static_cast<std::size_t>(frame - 1)][i]);
      out << buf;
    }
  }
}

}  // namespace palmtrack
