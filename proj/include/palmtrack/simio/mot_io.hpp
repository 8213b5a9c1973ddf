#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "palmtrack/filter/mbm_filter.hpp"
#include "palmtrack/metrics/tgospa.hpp"
#include "palmtrack/simio/detections.hpp"
#include "palmtrack/simio/scenario.hpp"

namespace palmtrack {

struct ParseError : std::runtime_error {
  ParseError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

// MOTChallenge-style CSV. Detections and results use
//   frame,id,left,top,width,height,conf,x,y,z
// with id = -1 for detections; ground truth uses
//   frame,id,left,top,width,height,flag,class,visibility
// where rows with flag != 1 or class != 1 are skipped on read. A missing
// visibility column is tolerated and defaults to 1 with a warning on stderr.

std::vector<DetectionFrame> read_detections(const std::string& path);
void write_detections(const std::string& path, const std::vector<DetectionFrame>& frames);

void write_results(const std::string& path, const TrackOutput& output);
TrajectorySet read_results(const std::string& path);

TrajectorySet read_gt(const std::string& path);
void write_gt(const std::string& path, const Scenario& scenario);

}  // namespace palmtrack
