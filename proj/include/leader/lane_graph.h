#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "leader/geometry.h"

namespace leader {

class OffMapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LaneEdge {
  int from = 0;
  int to = 0;
  double speed_limit = 0.0;
  double length = 0.0;
};

/// One forward traversal of the lane network starting at an agent's snap point.
struct CandidatePath {
  std::vector<int> edges;
  Polyline line;
};

struct PathExtraction {
  double max_length = 30.0;   // arc length of every extracted path (unless it dead-ends)
  double snap_distance = 3.0; // maximum distance from the agent to its lane
};

/// Directed lane network with straight edges and named ego reference routes.
class LaneGraph {
 public:
  LaneGraph() = default;

  int add_node(const std::string& id, Vec2 position);
  int add_edge(const std::string& from, const std::string& to, double speed_limit);
  void add_route(const std::string& name, const std::vector<std::string>& node_ids);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<LaneEdge>& edges() const { return edges_; }
  const std::vector<int>& out_edges(int node) const { return out_edges_.at(node); }
  int node_index(const std::string& id) const;
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Ego reference route by name; throws std::out_of_range when unknown.
  const Polyline& route(const std::string& name) const;
  std::vector<std::string> route_names() const;

  struct Snap {
    int edge = -1;
    double offset = 0.0;    // arc length along the edge
    double distance = 0.0;
  };
  /// Nearest point on any edge; ties resolve to the lowest edge index.
  Snap snap(Vec2 position) const;

  /// Every distinct forward traversal of length `params.max_length` (or up to a
  /// dead end) from the nearest lane point, ordered lexicographically by edge
  /// indices. Throws OffMapError when no lane lies within the snap distance.
  std::vector<CandidatePath> candidate_paths(Vec2 position, const PathExtraction& params = {}) const;

  /// Reads the JSON map format (nodes, edges, ego_paths).
  static LaneGraph load(const std::filesystem::path& file);
  static LaneGraph from_json_text(const std::string& text);

 private:
  std::string name_;
  std::vector<Vec2> nodes_;
  std::vector<std::string> node_ids_;
  std::map<std::string, int> index_;
  std::vector<LaneEdge> edges_;
  std::vector<std::vector<int>> out_edges_;
  std::map<std::string, Polyline> routes_;
};

}  // namespace leader
