#include "gdn/river.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gdn/errors.hpp"
#include "gdn/rng.hpp"
#include "gdn/series.hpp"

namespace gdn {

const Segment& RiverNetwork::segment(int id) const {
  if (id < 0 || id >= static_cast<int>(segments.size()))
    throw std::invalid_argument("unknown segment id " + std::to_string(id));
  return segments[static_cast<std::size_t>(id)];
}

std::vector<int> RiverNetwork::children_of(int id) const {
  std::vector<int> out;
  for (const auto& s : segments)
    if (s.parent == id) out.push_back(s.id);
  return out;
}

std::vector<int> RiverNetwork::chain_to_outlet(int id) const {
  std::vector<int> chain;
  int cur = id;
  while (cur != -1) {
    chain.push_back(cur);
    if (chain.size() > segments.size())
      throw std::invalid_argument("segment graph contains a cycle");
    cur = segment(cur).parent;
  }
  return chain;
}

std::pair<double, double> RiverNetwork::point_coords(const Placement& p) const {
  const Segment& s = segment(p.segment);
  // offset measured from the downstream end (x0, y0)
  const double f = s.length > 0 ? p.offset / s.length : 0.0;
  return {s.x0 + f * (s.x1 - s.x0), s.y0 + f * (s.y1 - s.y0)};
}

void RiverNetwork::validate() const {
  int roots = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (s.id != static_cast<int>(i))
      throw std::invalid_argument("segment ids must be dense 0..m-1");
    if (s.length <= 0)
      throw std::invalid_argument("segment length must be positive");
    if (s.parent == -1)
      ++roots;
    else
      segment(s.parent);  // bounds check
  }
  if (roots != 1) throw std::invalid_argument("network must have one outlet");
  if (segments[static_cast<std::size_t>(outlet)].parent != -1)
    throw std::invalid_argument("outlet segment must have no parent");
  for (const auto& s : segments) chain_to_outlet(s.id);  // acyclicity
  // Shreve consistency: leaves are 1, junctions sum their children.
  for (const auto& s : segments) {
    auto kids = children_of(s.id);
    if (kids.empty()) {
      if (s.shreve != 1)
        throw std::invalid_argument("leaf segment must have Shreve order 1");
    } else {
      int sum = 0;
      for (int k : kids) sum += segment(k).shreve;
      if (s.shreve != sum)
        throw std::invalid_argument(
            "junction Shreve order must equal the sum of its children");
    }
  }
  if (placements.size() != sensor_ids.size())
    throw std::invalid_argument("placements and sensor_ids differ in length");
  for (const auto& p : placements) {
    const Segment& s = segment(p.segment);
    if (p.offset < 0 || p.offset > s.length)
      throw std::invalid_argument("placement offset outside its segment");
  }
}

namespace {

void compute_shreve(std::vector<Segment>& segs) {
  // children lists
  std::vector<std::vector<int>> kids(segs.size());
  for (const auto& s : segs)
    if (s.parent != -1) kids[static_cast<std::size_t>(s.parent)].push_back(s.id);
  // post-order accumulation, iterative to be safe on deep chains
  std::vector<int> order;
  std::vector<int> stack;
  for (const auto& s : segs)
    if (s.parent == -1) stack.push_back(s.id);
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    order.push_back(cur);
    for (int k : kids[static_cast<std::size_t>(cur)]) stack.push_back(k);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& s = segs[static_cast<std::size_t>(*it)];
    const auto& ks = kids[static_cast<std::size_t>(*it)];
    if (ks.empty()) {
      s.shreve = 1;
    } else {
      int sum = 0;
      for (int k : ks) sum += segs[static_cast<std::size_t>(k)].shreve;
      s.shreve = sum;
    }
  }
}

// Recursive upward layout: each segment is drawn from its downstream point
// towards angle theta; children fan out around the parent's direction.
void embed(std::vector<Segment>& segs,
           const std::vector<std::vector<int>>& kids, int id, double x,
           double y, double theta, int level) {
  Segment& s = segs[static_cast<std::size_t>(id)];
  s.x0 = x;
  s.y0 = y;
  s.x1 = x + s.length * std::cos(theta);
  s.y1 = y + s.length * std::sin(theta);
  const auto& ks = kids[static_cast<std::size_t>(id)];
  const double spread = std::numbers::pi / (3.0 + level);
  for (std::size_t c = 0; c < ks.size(); ++c) {
    const double child_theta =
        theta + (ks.size() == 1 ? 0.0 : (c == 0 ? -spread : spread));
    embed(segs, kids, ks[c], s.x1, s.y1, child_theta, level + 1);
  }
}

}  // namespace

RiverNetwork build_river_network(int n_sensors, double branch_prob, int depth,
                                 std::uint64_t seed) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (n_sensors < 1) throw std::invalid_argument("need at least one sensor");
  if (!(branch_prob >= 0.0 && branch_prob <= 1.0))
    throw std::invalid_argument("branch_prob must lie in [0,1]");

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> len_dist(0.5, 1.5);
  std::bernoulli_distribution branch(branch_prob);

  RiverNetwork net;
  // Breadth-first growth from the outlet so ids stay dense.
  struct Pending {
    int parent;
    int level;
  };
  std::vector<Pending> queue{{-1, 1}};
  while (!queue.empty()) {
    Pending p = queue.front();
    queue.erase(queue.begin());
    Segment s;
    s.id = static_cast<int>(net.segments.size());
    s.parent = p.parent;
    s.length = len_dist(rng);
    net.segments.push_back(s);
    if (p.level < depth && branch(rng)) {
      queue.push_back({s.id, p.level + 1});
      queue.push_back({s.id, p.level + 1});
    }
  }
  net.outlet = 0;
  compute_shreve(net.segments);

  std::vector<std::vector<int>> kids(net.segments.size());
  for (const auto& s : net.segments)
    if (s.parent != -1) kids[static_cast<std::size_t>(s.parent)].push_back(s.id);
  embed(net.segments, kids, net.outlet, 0.0, 0.0, std::numbers::pi / 2, 0);

  std::uniform_int_distribution<int> seg_dist(
      0, static_cast<int>(net.segments.size()) - 1);
  for (int i = 0; i < n_sensors; ++i) {
    Placement pl;
    pl.segment = seg_dist(rng);
    std::uniform_real_distribution<double> off(
        0.0, net.segments[static_cast<std::size_t>(pl.segment)].length);
    pl.offset = off(rng);
    net.placements.push_back(pl);
    net.sensor_ids.push_back("S" + std::to_string(i + 1));
  }
  net.validate();
  return net;
}

namespace {

// Index of the first segment in chain(a) that also appears in chain(b),
// with the positions in both chains. Returns segment id -1 if disjoint
// (cannot happen in a rooted tree).
struct Meet {
  int segment;
  std::size_t pos_a;
  std::size_t pos_b;
};

Meet lowest_common_segment(const std::vector<int>& chain_a,
                           const std::vector<int>& chain_b) {
  for (std::size_t i = 0; i < chain_a.size(); ++i) {
    for (std::size_t j = 0; j < chain_b.size(); ++j) {
      if (chain_a[i] == chain_b[j]) return {chain_a[i], i, j};
    }
  }
  return {-1, 0, 0};
}

}  // namespace

double stream_distance(const RiverNetwork& net, const Placement& a,
                       const Placement& b) {
  net.segment(a.segment);
  net.segment(b.segment);
  if (a.segment == b.segment) return std::abs(a.offset - b.offset);

  const auto chain_a = net.chain_to_outlet(a.segment);
  const auto chain_b = net.chain_to_outlet(b.segment);
  const Meet m = lowest_common_segment(chain_a, chain_b);
  if (m.segment < 0) throw std::invalid_argument("disconnected segments");

  // Distance from a placement down to the upstream junction of the meeting
  // segment: own offset plus every full segment strictly in between.
  auto descent = [&](const Placement& p, const std::vector<int>& chain,
                     std::size_t meet_pos) {
    double d = p.offset;
    for (std::size_t i = 1; i < meet_pos; ++i)
      d += net.segment(chain[i]).length;
    return d;
  };

  if (m.segment == a.segment) {
    // b flows down into a's segment, entering at its upstream end.
    const double down_b = descent(b, chain_b, m.pos_b);
    return down_b + (net.segment(a.segment).length - a.offset);
  }
  if (m.segment == b.segment) {
    const double down_a = descent(a, chain_a, m.pos_a);
    return down_a + (net.segment(b.segment).length - b.offset);
  }
  // Flow-unconnected: both paths meet at the junction at the upstream end
  // of the common segment.
  return descent(a, chain_a, m.pos_a) + descent(b, chain_b, m.pos_b);
}

bool flow_connected(const RiverNetwork& net, const Placement& a,
                    const Placement& b) {
  net.segment(a.segment);
  net.segment(b.segment);
  if (a.segment == b.segment) return true;
  const auto chain_a = net.chain_to_outlet(a.segment);
  const auto chain_b = net.chain_to_outlet(b.segment);
  if (std::find(chain_a.begin(), chain_a.end(), b.segment) != chain_a.end())
    return true;
  return std::find(chain_b.begin(), chain_b.end(), a.segment) !=
         chain_b.end();
}

void write_network(const RiverNetwork& net, const std::string& edges_path,
                   const std::string& placements_path) {
  {
    std::ofstream f(edges_path);
    if (!f) throw IoError("cannot write file: " + edges_path);
    f << "segment_id,parent_id,length\n";
    for (const auto& s : net.segments) {
      f << s.id << ',';
      if (s.parent != -1) f << s.parent;
      f << ',' << format_double(s.length) << '\n';
    }
    if (!f) throw IoError("write failed: " + edges_path);
  }
  {
    std::ofstream f(placements_path);
    if (!f) throw IoError("cannot write file: " + placements_path);
    f << "sensor_id,segment_id,offset\n";
    for (std::size_t i = 0; i < net.placements.size(); ++i)
      f << net.sensor_ids[i] << ',' << net.placements[i].segment << ','
        << format_double(net.placements[i].offset) << '\n';
    if (!f) throw IoError("write failed: " + placements_path);
  }
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::size_t cols) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != cols)
      throw IoError(path + ": expected " + std::to_string(cols) +
                    " cells per row");
    if (first) {
      first = false;  // header
      continue;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

RiverNetwork load_network(const std::string& edges_path,
                          const std::string& placements_path) {
  RiverNetwork net;
  for (const auto& row : read_csv(edges_path, 3)) {
    Segment s;
    s.id = std::stoi(row[0]);
    s.parent = row[1].empty() ? -1 : std::stoi(row[1]);
    s.length = std::stod(row[2]);
    net.segments.push_back(s);
  }
  std::sort(net.segments.begin(), net.segments.end(),
            [](const Segment& a, const Segment& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < net.segments.size(); ++i)
    if (net.segments[i].parent == -1) net.outlet = net.segments[i].id;
  compute_shreve(net.segments);
  std::vector<std::vector<int>> kids(net.segments.size());
  for (const auto& s : net.segments)
    if (s.parent != -1) kids[static_cast<std::size_t>(s.parent)].push_back(s.id);
  embed(net.segments, kids, net.outlet, 0.0, 0.0, std::numbers::pi / 2, 0);

  for (const auto& row : read_csv(placements_path, 3)) {
    net.sensor_ids.push_back(row[0]);
    Placement p;
    p.segment = std::stoi(row[1]);
    p.offset = std::stod(row[2]);
    net.placements.push_back(p);
  }
  net.validate();
  return net;
}

}  // namespace gdn
