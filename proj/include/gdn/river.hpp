#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gdn {

// A placement locates a point on a stream segment. offset is the distance
// from the point to the downstream end of its segment, in length units.
struct Placement {
  int segment = -1;
  double offset = 0.0;
};

struct Segment {
  int id = -1;
  int parent = -1;  // -1 for the outlet
  double length = 1.0;
  int shreve = 1;   // additive stream order; doubles as the tail-up weight
  // Planar embedding for plot output: downstream and upstream endpoints.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Rooted in-tree of stream segments. Every segment has exactly one
// downstream parent except the outlet; flow runs child -> parent.
struct RiverNetwork {
  std::vector<Segment> segments;        // indexed by segment id
  int outlet = 0;
  std::vector<Placement> placements;    // one per sensor
  std::vector<std::string> sensor_ids;  // parallel to placements

  const Segment& segment(int id) const;
  std::vector<int> children_of(int id) const;

  // Path of segment ids from `id` down to the outlet (inclusive).
  std::vector<int> chain_to_outlet(int id) const;

  // Planar coordinates of a placement, interpolated along its segment.
  std::pair<double, double> point_coords(const Placement& p) const;

  void validate() const;
};

// Random rooted binary in-tree: starting at the outlet, each segment branches
// into two children with probability branch_prob until `depth` levels.
// Segment lengths are uniform in [0.5, 1.5]; sensors are placed uniformly at
// random on segments (several per segment allowed).
RiverNetwork build_river_network(int n_sensors, double branch_prob, int depth,
                                 std::uint64_t seed);

// Length of the unique along-network path between two placements.
double stream_distance(const RiverNetwork& net, const Placement& a,
                       const Placement& b);

// True iff one point lies on the downstream path from the other to the outlet.
bool flow_connected(const RiverNetwork& net, const Placement& a,
                    const Placement& b);

// File formats: edge list "segment_id,parent_id,length" (outlet's parent
// cell empty) and placements "sensor_id,segment_id,offset".
void write_network(const RiverNetwork& net, const std::string& edges_path,
                   const std::string& placements_path);
RiverNetwork load_network(const std::string& edges_path,
                          const std::string& placements_path);

}  // namespace gdn
