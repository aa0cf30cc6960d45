#pragma once

#include <array>
#include <compare>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "taskdfa/dfa.hpp"

namespace taskdfa {

// Tile colors of the running example. Green marks the drying tiles (drawn
// brown in some renderings of the workspace).
enum class Color : std::uint8_t { None, Red, Yellow, Blue, Green };

inline const Alphabet& color_alphabet() {
  static const Alphabet a{"red", "yellow", "blue", "green"};
  return a;
}

inline constexpr Symbol kRed = 0, kYellow = 1, kBlue = 2, kGreen = 3;

inline Symbol color_symbol(Color c) {
  switch (c) {
    case Color::Red: return kRed;
    case Color::Yellow: return kYellow;
    case Color::Blue: return kBlue;
    case Color::Green: return kGreen;
    case Color::None: break;
  }
  throw InputError("uncolored tile has no symbol");
}

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Action : std::uint8_t { Up, Down, Left, Right };
inline constexpr std::array<Action, 4> kActions{Action::Up, Action::Down, Action::Left, Action::Right};

inline const char* action_name(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
  }
  return "?";
}

inline Action parse_action(std::string_view s) {
  for (Action a : kActions)
    if (s == action_name(a)) return a;
  throw InputError("unknown action '" + std::string(s) + "'");
}

struct Outcome {
  Cell cell;
  double probability;
};

/// Discretized workspace. Row 0 is the top row; "down" increases y. With
/// probability `slip` the wind pushes the agent down whatever it chose.
class GridWorld {
 public:
  GridWorld(int width, int height, std::vector<Color> tiles, double slip = 1.0 / 32.0)
      : width_(width), height_(height), tiles_(std::move(tiles)), slip_(slip) {
    if (width_ <= 0 || height_ <= 0) throw InputError("grid dimensions must be positive");
    if (tiles_.size() != static_cast<std::size_t>(width_ * height_)) throw InputError("tile count mismatch");
    if (!(slip_ >= 0.0 && slip_ < 1.0)) throw InputError("slip probability must lie in [0, 1)");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double slip() const { return slip_; }
  std::size_t num_cells() const { return tiles_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y * width_ + c.x); }
  Cell cell(std::size_t index) const {
    return {static_cast<int>(index) % width_, static_cast<int>(index) / width_};
  }

  Color color(Cell c) const {
    if (!in_bounds(c)) throw InputError("cell out of bounds");
    return tiles_[index(c)];
  }

  /// Deterministic move; off-grid moves leave the agent in place.
  Cell move(Cell c, Action a) const {
    Cell n = c;
    switch (a) {
      case Action::Up: --n.y; break;
      case Action::Down: ++n.y; break;
      case Action::Left: --n.x; break;
      case Action::Right: ++n.x; break;
    }
    return in_bounds(n) ? n : c;
  }

  /// P(· | cell, action); coinciding outcomes are merged.
  std::vector<Outcome> step_distribution(Cell c, Action a) const {
    if (!in_bounds(c)) throw InputError("cell out of bounds");
    Cell intended = move(c, a), pushed = move(c, Action::Down);
    if (intended == pushed || slip_ == 0.0) return {{intended, 1.0}};
    return {{intended, 1.0 - slip_}, {pushed, slip_}};
  }

  bool operator==(const GridWorld&) const = default;

 private:
  int width_;
  int height_;
  std::vector<Color> tiles_;
  double slip_;
};

struct Step {
  Action action;
  Cell result;
  bool operator==(const Step&) const = default;
};

struct Demonstration {
  Cell start;
  std::vector<Step> steps;

  std::vector<Cell> cells() const {
    std::vector<Cell> out{start};
    for (const auto& s : steps) out.push_back(s.result);
    return out;
  }
  bool operator==(const Demonstration&) const = default;
};

/// Checks every step is a possible outcome of its action.
inline void validate_demo(const GridWorld& w, const Demonstration& d) {
  if (!w.in_bounds(d.start)) throw InputError("demonstration start out of bounds");
  if (d.steps.empty()) throw InputError("demonstration has no steps");
  Cell at = d.start;
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const auto& s = d.steps[i];
    if (!w.in_bounds(s.result)) throw InputError("demonstration cell out of bounds at step " + std::to_string(i));
    bool possible = false;
    for (const auto& o : w.step_distribution(at, s.action)) possible |= (o.cell == s.result);
    if (!possible) throw InputError("step " + std::to_string(i) + " is not a possible outcome of its action");
    at = s.result;
  }
}

/// Colors of the visited cells (start included), uncolored cells skipped,
/// then stutter-collapsed.
inline Word featurize_path(const GridWorld& w, const std::vector<Cell>& cells) {
  Word out;
  for (Cell c : cells) {
    Color col = w.color(c);
    if (col != Color::None) out.push_back(color_symbol(col));
  }
  return stutter_collapse(out);
}

inline Word featurize(const GridWorld& w, const Demonstration& d) { return featurize_path(w, d.cells()); }

// Task DFAs over {red, yellow, blue, green}, returned in canonical minimal form.

/// Rules: eventually yellow; never red; if blue is seen before the first
/// yellow, green must come between that blue and the yellow.
inline Dfa ground_truth_dfa() {
  enum : StateId { Dry, Wet, Done, Dead };
  // columns: red, yellow, blue, green
  std::vector<StateId> t{
      Dead, Done, Wet, Dry,    // Dry
      Dead, Dead, Wet, Dry,    // Wet
      Dead, Done, Done, Done,  // Done
      Dead, Dead, Dead, Dead,  // Dead
  };
  return minimize(Dfa(color_alphabet(), 4, Dry, {false, false, true, false}, std::move(t)));
}

/// Eventually yellow and never red, with no drying rule.
inline Dfa avoid_lava_reach_yellow_dfa() {
  enum : StateId { Start, Done, Dead };
  std::vector<StateId> t{
      Dead, Done, Start, Start,  // Start
      Dead, Done, Done, Done,    // Done
      Dead, Dead, Dead, Dead,    // Dead
  };
  return minimize(Dfa(color_alphabet(), 3, Start, {false, true, false}, std::move(t)));
}

/// Eventually yellow, nothing else.
inline Dfa reach_yellow_dfa() {
  std::vector<StateId> t{0, 1, 0, 0, 1, 1, 1, 1};
  return minimize(Dfa(color_alphabet(), 2, 0, {false, true}, std::move(t)));
}

// Map text: one row per line, 'r' 'y' 'b' 'g' for colored tiles, '.' for
// uncolored. Optional first line "slip: <p>".

inline GridWorld load_world(std::string_view text) {
  double slip = 1.0 / 32.0;
  std::vector<std::string> rows;
  for (auto raw : detail::split(text, '\n')) {
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("slip:", 0) == 0) {
      try {
        slip = std::stod(std::string(line.substr(5)));
      } catch (const std::exception&) {
        throw InputError("bad slip probability");
      }
      continue;
    }
    rows.emplace_back(line);
  }
  if (rows.empty()) throw InputError("map has no rows");
  const auto width = rows.front().size();
  std::vector<Color> tiles;
  for (const auto& r : rows) {
    if (r.size() != width) throw InputError("ragged map rows");
    for (char c : r) switch (c) {
        case 'r': tiles.push_back(Color::Red); break;
        case 'y': tiles.push_back(Color::Yellow); break;
        case 'b': tiles.push_back(Color::Blue); break;
        case 'g': tiles.push_back(Color::Green); break;
        case '.': tiles.push_back(Color::None); break;
        default: throw InputError(std::string("unknown map character '") + c + "'");
      }
  }
  return GridWorld(static_cast<int>(width), static_cast<int>(rows.size()), std::move(tiles), slip);
}

inline std::string serialize_world(const GridWorld& w) {
  std::ostringstream out;
  out.precision(17);
  out << "slip: " << w.slip() << "\n";
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) out << ".rybg"[static_cast<int>(w.color({x, y}))];
    out << "\n";
  }
  return out.str();
}

namespace detail {

inline Cell parse_cell(std::string_view s) {
  auto parts = split(trim(s), ',');
  if (parts.size() != 2) throw InputError("expected cell 'x,y', got '" + std::string(s) + "'");
  try {
    return {std::stoi(std::string(trim(parts[0]))), std::stoi(std::string(trim(parts[1])))};
  } catch (const std::exception&) {
    throw InputError("bad cell '" + std::string(s) + "'");
  }
}

}  // namespace detail

// Demonstration text: first line "x,y" (start cell), then one action per
// line, optionally followed by the observed result cell ("right 3,4") when
// it differs from the intended move (a slip).

inline Demonstration load_demo(std::string_view text, const GridWorld& w) {
  Demonstration d;
  bool have_start = false;
  for (auto raw : detail::split(text, '\n')) {
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!have_start) {
      d.start = detail::parse_cell(line);
      if (!w.in_bounds(d.start)) throw InputError("demonstration start outside the world");
      have_start = true;
      continue;
    }
    auto space = line.find_first_of(" \t");
    Action a = parse_action(line.substr(0, space));
    Cell from = d.cells().back();
    Cell result = space == std::string_view::npos ? w.move(from, a) : detail::parse_cell(line.substr(space + 1));
    if (!w.in_bounds(result)) throw InputError("demonstration cell outside the world");
    d.steps.push_back({a, result});
  }
  if (!have_start) throw InputError("demonstration has no start cell");
  validate_demo(w, d);
  return d;
}

inline std::string serialize_demo(const Demonstration& d, const GridWorld& w) {
  std::ostringstream out;
  out << d.start.x << "," << d.start.y << "\n";
  Cell at = d.start;
  for (const auto& s : d.steps) {
    out << action_name(s.action);
    if (w.move(at, s.action) != s.result) out << " " << s.result.x << "," << s.result.y;
    out << "\n";
    at = s.result;
  }
  return out.str();
}

}  // namespace taskdfa
