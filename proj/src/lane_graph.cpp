#include "leader/lane_graph.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace leader {

int LaneGraph::add_node(const std::string& id, Vec2 position) {
  if (index_.count(id)) throw std::invalid_argument("duplicate lane node id: " + id);
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(position);
  node_ids_.push_back(id);
  index_[id] = idx;
  out_edges_.emplace_back();
  return idx;
}

int LaneGraph::node_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::invalid_argument("unknown lane node id: " + id);
  return it->second;
}

int LaneGraph::add_edge(const std::string& from, const std::string& to, double speed_limit) {
  LaneEdge e;
  e.from = node_index(from);
  e.to = node_index(to);
  e.speed_limit = speed_limit;
  e.length = (nodes_[e.to] - nodes_[e.from]).norm();
  if (!(e.length > 0.0)) throw std::invalid_argument("lane edge " + from + "->" + to + " has zero length");
  if (!(speed_limit > 0.0)) throw std::invalid_argument("lane edge " + from + "->" + to + " needs a positive speed limit");
  const int idx = static_cast<int>(edges_.size());
  edges_.push_back(e);
  out_edges_[e.from].push_back(idx);
  return idx;
}

void LaneGraph::add_route(const std::string& name, const std::vector<std::string>& node_ids) {
  std::vector<Vec2> pts;
  for (const auto& id : node_ids) pts.push_back(nodes_[node_index(id)]);
  routes_.insert_or_assign(name, Polyline(std::move(pts)));
}

const Polyline& LaneGraph::route(const std::string& name) const {
  auto it = routes_.find(name);
  if (it == routes_.end()) throw std::out_of_range("unknown ego route: " + name);
  return it->second;
}

std::vector<std::string> LaneGraph::route_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : routes_) names.push_back(name);
  return names;
}

LaneGraph::Snap LaneGraph::snap(Vec2 position) const {
  Snap best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Vec2 a = nodes_[edges_[i].from];
    const Vec2 d = nodes_[edges_[i].to] - a;
    const double t = std::clamp((position - a).dot(d) / d.squared_norm(), 0.0, 1.0);
    const double dist = (position - (a + d * t)).norm();
    if (dist < best.distance) {
      best = {static_cast<int>(i), t * edges_[i].length, dist};
    }
  }
  return best;
}

namespace {

void push_point(std::vector<Vec2>& pts, Vec2 p) {
  if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
}

}  // namespace

std::vector<CandidatePath> LaneGraph::candidate_paths(Vec2 position, const PathExtraction& params) const {
  const Snap start = snap(position);
  if (start.edge < 0 || start.distance > params.snap_distance) {
    throw OffMapError("no lane within snapping distance of (" + std::to_string(position.x) + ", " +
                      std::to_string(position.y) + ")");
  }

  std::vector<CandidatePath> out;
  std::vector<int> edge_stack;
  std::vector<Vec2> point_stack;

  // Depth-first over successor edges in increasing index order, which yields the
  // lexicographic order by edge sequence.
  auto emit = [&](const std::vector<Vec2>& pts) {
    std::vector<Vec2> line = pts;
    if (line.size() < 2) {
      // Dead end exactly at the snap point: keep a degenerate-free stub so
      // every agent has at least one path.
      const LaneEdge& e = edges_[edge_stack.front()];
      const Vec2 dir = (nodes_[e.to] - nodes_[e.from]) * (1.0 / e.length);
      line = {pts.front(), pts.front() + dir * 1e-3};
    }
    out.push_back({edge_stack, Polyline(std::move(line))});
  };

  auto visit = [&](auto&& self, int edge, double enter_offset, double remaining) -> void {
    const LaneEdge& e = edges_[edge];
    const Vec2 a = nodes_[e.from];
    const Vec2 dir = (nodes_[e.to] - a) * (1.0 / e.length);
    const double available = e.length - enter_offset;
    edge_stack.push_back(edge);
    const std::size_t mark = point_stack.size();
    if (remaining <= available) {
      push_point(point_stack, a + dir * (enter_offset + remaining));
      emit(point_stack);
    } else {
      push_point(point_stack, nodes_[e.to]);
      const auto& next = out_edges_[e.to];
      if (next.empty()) {
        emit(point_stack);
      } else {
        std::vector<int> sorted = next;
        std::sort(sorted.begin(), sorted.end());
        for (int n : sorted) self(self, n, 0.0, remaining - available);
      }
    }
    point_stack.resize(mark);
    edge_stack.pop_back();
  };

  const LaneEdge& e0 = edges_[start.edge];
  const Vec2 a0 = nodes_[e0.from];
  const Vec2 start_point = a0 + (nodes_[e0.to] - a0) * (start.offset / e0.length);
  point_stack.push_back(start_point);
  visit(visit, start.edge, start.offset, params.max_length);
  return out;
}

LaneGraph LaneGraph::from_json_text(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  LaneGraph g;
  g.name_ = doc.value("name", std::string{});
  for (const auto& n : doc.at("nodes")) {
    g.add_node(n.at("id").get<std::string>(), {n.at("x").get<double>(), n.at("y").get<double>()});
  }
  for (const auto& e : doc.at("edges")) {
    g.add_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("speed_limit").get<double>());
  }
  if (doc.contains("ego_paths")) {
    for (const auto& r : doc.at("ego_paths")) {
      g.add_route(r.at("name").get<std::string>(), r.at("nodes").get<std::vector<std::string>>());
    }
  }
  return g;
}

LaneGraph LaneGraph::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open map file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error("malformed map file " + file.string() + ": " + ex.what());
  }
}

}  // namespace leader
