#pragma once

// Traffic assignment on a five-node circular highway.
//
// Reconstruction. Nodes 1..5 sit on a ring. For node k and each ring
// direction there are four links, numbered k*10 + digit:
//
//   direction   entrance  exit  bypass  highway
//   clockwise      1        4      5       7
//   counter        3        2      6       8
//
// Highway link k7 (k8) is the segment arriving at node k in the clockwise
// (counterclockwise) direction; exit ramp k4 (k2) leaves it at node k.
// Through traffic continues on bypass k5 (k6), which the entrance ramp k1
// (k3) merges with before the next highway segment. The clockwise path for
// OD pair (i, j) is
//
//   entrance(i) -> highway(i+1) -> bypass(i+1) -> ... -> highway(j) -> exit(j)
//
// and the counterclockwise path is its mirror image. Flows never use an exit
// ramp other than the one at their destination.
//
// Delays, with h(x) = 1 + x + x^2:
//   highway k:   10 h(y_k) + 2 kappa h(y_exit(k))
//   exit ramp:   h(y)
//   entrance k:  h(y_k) + kappa h(y_bypass(k))
//   bypass:      h(y)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fwvip/geometry.hpp"
#include "fwvip/operators.hpp"

namespace fwvip::tap {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kNumNodes = 5;

enum class LinkKind { Highway, ExitRamp, EntranceRamp, Bypass };
enum class Direction { Clockwise, Counterclockwise };

inline const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::Highway: return "highway";
    case LinkKind::ExitRamp: return "exit";
    case LinkKind::EntranceRamp: return "entrance";
    case LinkKind::Bypass: return "bypass";
  }
  return "?";
}

inline const char* to_string(Direction d) {
  return d == Direction::Clockwise ? "cw" : "ccw";
}

struct Link {
  int id = 0;
  LinkKind kind = LinkKind::Highway;
  int node = 0;
  Direction direction = Direction::Clockwise;
  std::optional<int> coupled_exit;    // Highway only
  std::optional<int> coupled_bypass;  // EntranceRamp only

  friend bool operator==(const Link&, const Link&) = default;
};

struct ODPair {
  int origin = 0;
  int dest = 0;
  double demand = 0.0;

  friend bool operator==(const ODPair&, const ODPair&) = default;
};

struct Path {
  std::size_t od = 0;
  Direction direction = Direction::Clockwise;
  std::vector<int> links;

  friend bool operator==(const Path&, const Path&) = default;
};

struct DelayModel {
  double kappa = 0.5;
  double highway_scale = 10.0;

  static double h(double x) { return 1.0 + x + x * x; }

  friend bool operator==(const DelayModel&, const DelayModel&) = default;
};

using DemandMap = std::map<std::pair<int, int>, double>;

inline DemandMap default_demands() {
  return {{{1, 4}, 0.1}, {{2, 5}, 0.2}, {{3, 1}, 0.3}, {{4, 2}, 0.4}, {{5, 3}, 0.5}};
}

inline int link_id(int node, int digit) { return node * 10 + digit; }

inline int next_node(int k, Direction d) {
  return d == Direction::Clockwise ? k % kNumNodes + 1 : (k + kNumNodes - 2) % kNumNodes + 1;
}

struct LinkDigits {
  int entrance, exit, bypass, highway;
};

inline LinkDigits digits(Direction d) {
  return d == Direction::Clockwise ? LinkDigits{1, 4, 5, 7} : LinkDigits{3, 2, 6, 8};
}

class TapInstance {
 public:
  TapInstance(std::vector<Link> links, std::vector<ODPair> ods, std::vector<Path> paths,
              DelayModel delay)
      : links_(std::move(links)), ods_(std::move(ods)), paths_(std::move(paths)), delay_(delay) {
    for (std::size_t i = 0; i < links_.size(); ++i) {
      if (!index_.emplace(links_[i].id, static_cast<Index>(i)).second) {
        throw ConfigError("duplicate link id " + std::to_string(links_[i].id));
      }
    }
    coupled_.assign(links_.size(), -1);
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const auto& l = links_[i];
      if (l.kind == LinkKind::Highway && !l.coupled_exit) {
        throw ConfigError("highway link " + std::to_string(l.id) + " has no coupled exit ramp");
      }
      if (l.kind == LinkKind::EntranceRamp && !l.coupled_bypass) {
        throw ConfigError("entrance ramp " + std::to_string(l.id) + " has no coupled bypass");
      }
      if (l.coupled_exit) coupled_[i] = index_of(*l.coupled_exit);
      if (l.coupled_bypass) coupled_[i] = index_of(*l.coupled_bypass);
    }
    incidence_ = Matrix::Zero(static_cast<Index>(links_.size()), static_cast<Index>(paths_.size()));
    for (std::size_t p = 0; p < paths_.size(); ++p) {
      if (paths_[p].od >= ods_.size()) throw ConfigError("path refers to unknown OD pair");
      for (int id : paths_[p].links) incidence_(index_of(id), static_cast<Index>(p)) = 1.0;
    }
    for (const auto& od : ods_) {
      if (!(od.demand >= 0.0) || !std::isfinite(od.demand)) {
        throw ConfigError("OD demand must be finite and >= 0");
      }
    }
  }

  const std::vector<Link>& links() const { return links_; }
  const std::vector<ODPair>& od_pairs() const { return ods_; }
  const std::vector<Path>& paths() const { return paths_; }
  const DelayModel& delay_model() const { return delay_; }
  double kappa() const { return delay_.kappa; }

  // Arc-chain matrix A (links x paths), entries in {0, 1}.
  const Matrix& incidence() const { return incidence_; }

  Index num_links() const { return static_cast<Index>(links_.size()); }
  Index num_paths() const { return static_cast<Index>(paths_.size()); }

  Index index_of(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ConfigError("unknown link id " + std::to_string(id));
    return it->second;
  }

  // Index of the coupled exit ramp (highway) or bypass (entrance), else -1.
  Index coupled_index(Index link) const { return coupled_[static_cast<std::size_t>(link)]; }

  // Path indices of OD pair w, in path order.
  std::vector<Index> paths_of(std::size_t w) const {
    std::vector<Index> out;
    for (std::size_t p = 0; p < paths_.size(); ++p) {
      if (paths_[p].od == w) out.push_back(static_cast<Index>(p));
    }
    return out;
  }

  // Product over OD pairs of {x_p >= 0, sum_{p in P_w} x_p = d_w}. Paths of
  // one OD pair must be contiguous.
  FeasibleSet feasible_set() const {
    std::vector<Block> blocks;
    Index next = 0;
    for (std::size_t w = 0; w < ods_.size(); ++w) {
      const auto idx = paths_of(w);
      if (idx.empty()) throw ConfigError("OD pair without paths");
      for (std::size_t j = 1; j < idx.size(); ++j) {
        if (idx[j] != idx[j - 1] + 1) throw ConfigError("paths of an OD pair must be contiguous");
      }
      if (idx.front() != next) throw ConfigError("OD pairs must be in path order");
      next = idx.back() + 1;
      blocks.emplace_back(ScaledSimplex(static_cast<Index>(idx.size()), ods_[w].demand));
    }
    return ProductSet(std::move(blocks));
  }

  friend bool operator==(const TapInstance& a, const TapInstance& b) {
    return a.links_ == b.links_ && a.ods_ == b.ods_ && a.paths_ == b.paths_ &&
           a.delay_ == b.delay_ && a.incidence_ == b.incidence_;
  }

 private:
  std::vector<Link> links_;
  std::vector<ODPair> ods_;
  std::vector<Path> paths_;
  DelayModel delay_;
  std::map<int, Index> index_;
  std::vector<Index> coupled_;
  Matrix incidence_;
};

// The canonical five-node instance with the given demands and kappa.
inline TapInstance build_instance(const DemandMap& demands = default_demands(), double kappa = 0.5) {
  const DemandMap defaults = default_demands();
  DemandMap merged = defaults;
  for (const auto& [od, d] : demands) {
    if (!defaults.count(od)) {
      throw ConfigError("no OD pair (" + std::to_string(od.first) + "," + std::to_string(od.second) +
                        ") in the circular-highway instance");
    }
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("OD demand must be finite and >= 0");
    merged[od] = d;
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be finite and >= 0");

  std::vector<Link> links;
  auto add_family = [&](LinkKind kind, int cw_digit, int ccw_digit) {
    for (Direction dir : {Direction::Clockwise, Direction::Counterclockwise}) {
      const int digit = dir == Direction::Clockwise ? cw_digit : ccw_digit;
      for (int k = 1; k <= kNumNodes; ++k) {
        Link l;
        l.id = link_id(k, digit);
        l.kind = kind;
        l.node = k;
        l.direction = dir;
        const LinkDigits dd = digits(dir);
        if (kind == LinkKind::Highway) l.coupled_exit = link_id(k, dd.exit);
        if (kind == LinkKind::EntranceRamp) l.coupled_bypass = link_id(k, dd.bypass);
        links.push_back(l);
      }
    }
  };
  add_family(LinkKind::Highway, 7, 8);
  add_family(LinkKind::ExitRamp, 4, 2);
  add_family(LinkKind::EntranceRamp, 1, 3);
  add_family(LinkKind::Bypass, 5, 6);

  // OD pairs in origin order, as listed in the demand table.
  std::vector<ODPair> ods;
  for (const auto& [od, d] : defaults) ods.push_back({od.first, od.second, merged.at(od)});
  std::sort(ods.begin(), ods.end(), [](const ODPair& a, const ODPair& b) { return a.origin < b.origin; });

  std::vector<Path> paths;
  for (std::size_t w = 0; w < ods.size(); ++w) {
    for (Direction dir : {Direction::Clockwise, Direction::Counterclockwise}) {
      const LinkDigits dd = digits(dir);
      Path p;
      p.od = w;
      p.direction = dir;
      p.links.push_back(link_id(ods[w].origin, dd.entrance));
      for (int k = next_node(ods[w].origin, dir);; k = next_node(k, dir)) {
        p.links.push_back(link_id(k, dd.highway));
        if (k == ods[w].dest) break;
        p.links.push_back(link_id(k, dd.bypass));
      }
      p.links.push_back(link_id(ods[w].dest, dd.exit));
      paths.push_back(std::move(p));
    }
  }
  return TapInstance(std::move(links), std::move(ods), std::move(paths), DelayModel{kappa, 10.0});
}

// y = A x.
inline Point link_flows(const TapInstance& inst, const Point& x) {
  detail::require_dim(inst.num_paths(), x.size(), "link_flows");
  return inst.incidence() * x;
}

inline Point link_delays(const TapInstance& inst, const Point& y) {
  detail::require_dim(inst.num_links(), y.size(), "link_delays");
  const DelayModel& dm = inst.delay_model();
  Point t(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const Link& l = inst.links()[static_cast<std::size_t>(i)];
    const double own = DelayModel::h(y[i]);
    switch (l.kind) {
      case LinkKind::Highway:
        t[i] = dm.highway_scale * own + 2.0 * dm.kappa * DelayModel::h(y[inst.coupled_index(i)]);
        break;
      case LinkKind::EntranceRamp:
        t[i] = own + dm.kappa * DelayModel::h(y[inst.coupled_index(i)]);
        break;
      case LinkKind::ExitRamp:
      case LinkKind::Bypass:
        t[i] = own;
        break;
    }
  }
  return t;
}

// Path travel times A^T T(A x).
inline Point path_operator(const TapInstance& inst, const Point& x) {
  return inst.incidence().transpose() * link_delays(inst, link_flows(inst, x));
}

inline VectorField path_field(const TapInstance& inst) {
  return VectorField{inst.num_paths(), [inst](const Point& x) { return path_operator(inst, x); }};
}

// max over OD pairs w and used paths p (x_p > tol) of T_p(x) - min_{q in P_w} T_q(x).
inline double wardrop_residual(const TapInstance& inst, const Point& x, double tol = 1e-6) {
  const Point times = path_operator(inst, x);
  double worst = 0.0;
  for (std::size_t w = 0; w < inst.od_pairs().size(); ++w) {
    const auto idx = inst.paths_of(w);
    double best = std::numeric_limits<double>::infinity();
    for (Index p : idx) best = std::min(best, times[p]);
    for (Index p : idx) {
      if (x[p] > tol) worst = std::max(worst, times[p] - best);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Instance file: JSON with the delay model, every link with its kind and
// coupling, the OD table and every path as an ordered link list.

inline LinkKind parse_kind(const std::string& s) {
  for (auto k : {LinkKind::Highway, LinkKind::ExitRamp, LinkKind::EntranceRamp, LinkKind::Bypass}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown link kind '" + s + "'");
}

inline Direction parse_direction(const std::string& s) {
  if (s == "cw") return Direction::Clockwise;
  if (s == "ccw") return Direction::Counterclockwise;
  throw ConfigError("unknown direction '" + s + "'");
}

inline nlohmann::ordered_json to_json(const TapInstance& inst) {
  nlohmann::ordered_json j;
  j["format"] = "fwvip-tap-instance";
  j["version"] = 1;
  j["delay"] = {{"h", {1.0, 1.0, 1.0}},
                {"kappa", inst.delay_model().kappa},
                {"highway_scale", inst.delay_model().highway_scale}};
  j["nodes"] = {1, 2, 3, 4, 5};
  auto links = nlohmann::ordered_json::array();
  for (const auto& l : inst.links()) {
    nlohmann::ordered_json e;
    e["id"] = l.id;
    e["kind"] = to_string(l.kind);
    e["node"] = l.node;
    e["direction"] = to_string(l.direction);
    if (l.coupled_exit) e["coupled_exit"] = *l.coupled_exit;
    if (l.coupled_bypass) e["coupled_bypass"] = *l.coupled_bypass;
    links.push_back(e);
  }
  j["links"] = links;
  auto ods = nlohmann::ordered_json::array();
  for (const auto& od : inst.od_pairs()) {
    ods.push_back({{"origin", od.origin}, {"dest", od.dest}, {"demand", od.demand}});
  }
  j["od_pairs"] = ods;
  auto paths = nlohmann::ordered_json::array();
  for (const auto& p : inst.paths()) {
    paths.push_back({{"od", p.od}, {"direction", to_string(p.direction)}, {"links", p.links}});
  }
  j["paths"] = paths;
  return j;
}

inline TapInstance from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "fwvip-tap-instance") {
      throw ConfigError("not a TAP instance file");
    }
    const auto& h = j.at("delay").at("h");
    if (h.size() != 3 || h[0] != 1.0 || h[1] != 1.0 || h[2] != 1.0) {
      throw ConfigError("only h(x) = 1 + x + x^2 is supported");
    }
    DelayModel dm{j.at("delay").at("kappa").get<double>(), j.at("delay").at("highway_scale").get<double>()};
    std::vector<Link> links;
    for (const auto& e : j.at("links")) {
      Link l;
      l.id = e.at("id").get<int>();
      l.kind = parse_kind(e.at("kind").get<std::string>());
      l.node = e.at("node").get<int>();
      l.direction = parse_direction(e.at("direction").get<std::string>());
      if (e.contains("coupled_exit")) l.coupled_exit = e.at("coupled_exit").get<int>();
      if (e.contains("coupled_bypass")) l.coupled_bypass = e.at("coupled_bypass").get<int>();
      links.push_back(l);
    }
    std::vector<ODPair> ods;
    for (const auto& e : j.at("od_pairs")) {
      ods.push_back({e.at("origin").get<int>(), e.at("dest").get<int>(), e.at("demand").get<double>()});
    }
    std::vector<Path> paths;
    for (const auto& e : j.at("paths")) {
      paths.push_back({e.at("od").get<std::size_t>(), parse_direction(e.at("direction").get<std::string>()),
                       e.at("links").get<std::vector<int>>()});
    }
    return TapInstance(std::move(links), std::move(ods), std::move(paths), dm);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed TAP instance: ") + e.what());
  }
}

inline void write_instance(const TapInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << to_json(inst).dump(2) << '\n';
}

inline TapInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace fwvip::tap
