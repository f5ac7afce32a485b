#pragma once

// Tracking and event file formats.
//
// canonical tracking: time,player_id,team,x,y[,ball_x,ball_y][,in_play]
// canonical events:   time,player_id,event_type[,end_time]
// metrica: the public sample-data layout (Home/Away tracking files with
//   three header rows, normalised coordinates, 25 Hz; one event file).

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::data {

enum class TrackingFormat { kCanonical, kMetrica };

inline TrackingFormat parse_tracking_format(const std::string& s) {
  if (s == "canonical" || s == "csv") return TrackingFormat::kCanonical;
  if (s == "metrica") return TrackingFormat::kMetrica;
  throw ConfigError("unknown tracking format: " + s);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& s, std::size_t line, const std::string& field) {
  const std::string t = trim(s);
  if (t.empty()) throw ParseError("empty " + field, line);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw ParseError("bad number in " + field + ": " + t, line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad number in " + field + ": " + t, line);
  }
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

inline std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[trim(header[i])] = i;
  return idx;
}

inline std::size_t require_column(const std::map<std::string, std::size_t>& idx, const std::string& name) {
  auto it = idx.find(name);
  if (it == idx.end()) throw ParseError("missing column " + name, 1);
  return it->second;
}

}  // namespace detail

// ---- canonical -------------------------------------------------------------

inline std::vector<TrackingFrame> read_tracking_csv(std::istream& in) {
  std::vector<TrackingFrame> frames;
  std::string line;
  if (!std::getline(in, line)) return frames;
  const auto idx = detail::header_index(detail::split_csv(line));
  const std::size_t c_time = detail::require_column(idx, "time");
  const std::size_t c_id = detail::require_column(idx, "player_id");
  const std::size_t c_team = detail::require_column(idx, "team");
  const std::size_t c_x = detail::require_column(idx, "x");
  const std::size_t c_y = detail::require_column(idx, "y");
  const bool has_ball = idx.count("ball_x") && idx.count("ball_y");
  const bool has_play = idx.count("in_play") != 0;
  const std::size_t need = std::max({c_time, c_id, c_team, c_x, c_y}) + 1;

  std::map<long long, std::size_t> by_tick;  // time in 1e-6 s ticks -> frame
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() < need) throw ParseError("too few columns", lineno);
    const double time = detail::to_double(cells[c_time], lineno, "time");
    const long long tick = std::llround(time * 1e6);
    auto [it, inserted] = by_tick.emplace(tick, frames.size());
    if (inserted) {
      frames.emplace_back();
      frames.back().time = time;
    }
    TrackingFrame& f = frames[it->second];
    PlayerState p;
    p.player_id = detail::trim(cells[c_id]);
    if (p.player_id.empty()) throw ParseError("empty player_id", lineno);
    const std::string team = detail::trim(cells[c_team]);
    if (team == "1" || team == "TEAM1") {
      p.team = Team::kTeam1;
    } else if (team == "2" || team == "TEAM2") {
      p.team = Team::kTeam2;
    } else {
      throw ParseError("bad team: " + team, lineno);
    }
    p.x = detail::to_double(cells[c_x], lineno, "x");
    p.y = detail::to_double(cells[c_y], lineno, "y");
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ParseError("non-finite position", lineno);
    if (f.find(p.player_id) != nullptr) throw ParseError("duplicate player " + p.player_id + " in frame", lineno);
    f.players.push_back(std::move(p));
    if (has_ball) {
      const std::size_t bx = idx.at("ball_x"), by = idx.at("ball_y");
      if (bx < cells.size() && by < cells.size() && !detail::trim(cells[bx]).empty()) {
        f.ball = Point(detail::to_double(cells[bx], lineno, "ball_x"), detail::to_double(cells[by], lineno, "ball_y"));
      }
    }
    if (has_play) {
      const std::size_t c = idx.at("in_play");
      if (c < cells.size()) {
        const std::string v = detail::trim(cells[c]);
        f.in_play = !(v == "0" || v == "false");
      }
    }
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const TrackingFrame& a, const TrackingFrame& b) { return a.time < b.time; });
  return frames;
}

inline void write_tracking_csv(std::ostream& out, const std::vector<TrackingFrame>& frames) {
  out << "time,player_id,team,x,y,ball_x,ball_y,in_play\n" << std::setprecision(17);
  for (const auto& f : frames) {
    for (const auto& p : f.players) {
      out << f.time << ',' << p.player_id << ',' << static_cast<int>(p.team) << ',' << p.x << ',' << p.y << ',';
      if (f.ball) out << f.ball->x() << ',' << f.ball->y();
      else out << ',';
      out << ',' << (f.in_play ? 1 : 0) << '\n';
    }
  }
}

inline std::vector<EventRecord> read_events_csv(std::istream& in) {
  std::vector<EventRecord> events;
  std::string line;
  if (!std::getline(in, line)) return events;
  const auto idx = detail::header_index(detail::split_csv(line));
  const std::size_t c_time = detail::require_column(idx, "time");
  const std::size_t c_id = detail::require_column(idx, "player_id");
  const std::size_t c_type = detail::require_column(idx, "event_type");
  const bool has_end = idx.count("end_time") != 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() <= std::max({c_time, c_id, c_type})) throw ParseError("too few columns", lineno);
    EventRecord e;
    e.time = detail::to_double(cells[c_time], lineno, "time");
    if (e.time < 0.0) throw ParseError("negative event time", lineno);
    e.player_id = detail::trim(cells[c_id]);
    e.type = parse_event_type(detail::trim(cells[c_type]));
    if (has_end) {
      const std::size_t c = idx.at("end_time");
      if (c < cells.size() && !detail::trim(cells[c]).empty()) e.end_time = detail::to_double(cells[c], lineno, "end_time");
    }
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  return events;
}

inline void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events) {
  out << "time,player_id,event_type,end_time\n" << std::setprecision(17);
  for (const auto& e : events) {
    out << e.time << ',' << e.player_id << ',' << to_string(e.type) << ',';
    if (e.end_time) out << *e.end_time;
    out << '\n';
  }
}

// ---- metrica ---------------------------------------------------------------

inline constexpr double kMetricaRate = 25.0;

// One team's tracking file. Ball columns are read too; rows where the ball is
// missing are out of play.
inline std::vector<TrackingFrame> read_metrica_team(std::istream& in, const std::string& team_name, Team team,
                                                    const PitchConfig& pitch) {
  std::vector<TrackingFrame> frames;
  std::string line;
  std::vector<std::string> header;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line)) return frames;
    if (i == 2) header = detail::split_csv(line);
  }
  std::size_t c_time = 2;
  std::vector<std::pair<std::size_t, std::string>> player_cols;
  std::optional<std::size_t> ball_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = detail::trim(header[i]);
    if (h.rfind("Time", 0) == 0) c_time = i;
    if (h.rfind("Player", 0) == 0) player_cols.emplace_back(i, team_name + "_" + h.substr(6));
    if (h == "Ball") ball_col = i;
  }
  std::size_t lineno = 3;
  auto cell = [](const std::vector<std::string>& cells, std::size_t i) {
    return i < cells.size() ? detail::trim(cells[i]) : std::string();
  };
  auto missing = [](const std::string& s) { return s.empty() || s == "NaN" || s == "nan"; };
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    TrackingFrame f;
    f.time = detail::to_double(cell(cells, c_time), lineno, "time");
    for (const auto& [c, id] : player_cols) {
      const std::string sx = cell(cells, c), sy = cell(cells, c + 1);
      if (missing(sx) || missing(sy)) continue;
      PlayerState p;
      p.player_id = id;
      p.team = team;
      p.x = detail::to_double(sx, lineno, id + " x") * pitch.length;
      p.y = (1.0 - detail::to_double(sy, lineno, id + " y")) * pitch.width;
      f.players.push_back(std::move(p));
    }
    if (ball_col) {
      const std::string sx = cell(cells, *ball_col), sy = cell(cells, *ball_col + 1);
      if (!missing(sx) && !missing(sy)) {
        f.ball = Point(detail::to_double(sx, lineno, "ball x") * pitch.length,
                       (1.0 - detail::to_double(sy, lineno, "ball y")) * pitch.width);
      }
    }
    f.in_play = f.ball.has_value();
    frames.push_back(std::move(f));
  }
  return frames;
}

// Merges the two team files frame by frame (matched on row order and time).
inline std::vector<TrackingFrame> merge_metrica(std::vector<TrackingFrame> home, const std::vector<TrackingFrame>& away) {
  if (home.size() != away.size()) throw ParseError("home and away files differ in frame count", 0);
  for (std::size_t i = 0; i < home.size(); ++i) {
    if (std::abs(home[i].time - away[i].time) > 1e-6) throw ParseError("home and away timestamps differ", i + 4);
    for (const auto& p : away[i].players) home[i].players.push_back(p);
    home[i].in_play = home[i].in_play && away[i].in_play;
  }
  return home;
}

inline std::string metrica_away_path(const std::string& home_path) {
  std::string away = home_path;
  const auto pos = away.rfind("Home");
  if (pos == std::string::npos) throw ConfigError("metrica home file name must contain 'Home': " + home_path);
  away.replace(pos, 4, "Away");
  return away;
}

// Events: Team,Type,Subtype,Period,Start Frame,Start Time [s],End Frame,End Time [s],From,To,Start X,...
// Every action is a touch by its actor; a completed pass adds a touch by
// the receiver at arrival; BALL OUT adds an OUT at the nearest line.
inline std::vector<EventRecord> read_metrica_events(std::istream& in, const PitchConfig& pitch) {
  std::vector<EventRecord> events;
  std::string line;
  if (!std::getline(in, line)) return events;
  const auto idx = detail::header_index(detail::split_csv(line));
  const std::size_t c_team = detail::require_column(idx, "Team");
  const std::size_t c_type = detail::require_column(idx, "Type");
  const std::size_t c_t0 = detail::require_column(idx, "Start Time [s]");
  const std::size_t c_t1 = detail::require_column(idx, "End Time [s]");
  const std::size_t c_from = detail::require_column(idx, "From");
  const std::size_t c_to = detail::require_column(idx, "To");
  const std::size_t c_ex = detail::require_column(idx, "End X");
  const std::size_t c_ey = detail::require_column(idx, "End Y");
  auto player = [](const std::string& team, const std::string& who) {
    return who.rfind("Player", 0) == 0 ? team + "_" + who.substr(6) : std::string();
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() <= std::max({c_team, c_type, c_t0, c_t1, c_from, c_to, c_ex, c_ey})) {
      throw ParseError("too few columns", lineno);
    }
    const std::string team = detail::trim(cells[c_team]);
    const std::string type = detail::trim(cells[c_type]);
    const double t0 = detail::to_double(cells[c_t0], lineno, "start time");
    const double t1 = detail::to_double(cells[c_t1], lineno, "end time");
    const std::string from = player(team, detail::trim(cells[c_from]));
    const std::string to = player(team, detail::trim(cells[c_to]));
    if (type == "CARD") continue;
    if (type == "BALL OUT") {
      if (!from.empty()) events.push_back({t0, from, EventType::kTouch, std::nullopt});
      const std::string ex = detail::trim(cells[c_ex]), ey = detail::trim(cells[c_ey]);
      if (ex.empty() || ey.empty() || ex == "NaN" || ey == "NaN") continue;
      const Point end(detail::to_double(ex, lineno, "End X") * pitch.length,
                      (1.0 - detail::to_double(ey, lineno, "End Y")) * pitch.width);
      const double dist[4] = {end.x(), pitch.length - end.x(), end.y(), pitch.width - end.y()};
      const auto nearest = static_cast<std::size_t>(std::min_element(dist, dist + 4) - dist);
      events.push_back({t1, ball_out_ids()[nearest], EventType::kOut, std::nullopt});
      continue;
    }
    if (from.empty()) continue;
    events.push_back({t0, from, EventType::kTouch, std::nullopt});
    if (type == "PASS") {
      events.push_back({t0, from, EventType::kPass, t1});
      if (!to.empty()) events.push_back({t1, to, EventType::kTouch, std::nullopt});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  return events;
}

inline std::vector<TrackingFrame> load_tracking(const std::string& path, const std::string& format,
                                                const PitchConfig& pitch = {}) {
  switch (parse_tracking_format(format)) {
    case TrackingFormat::kCanonical: {
      auto in = detail::open(path);
      return read_tracking_csv(in);
    }
    case TrackingFormat::kMetrica: {
      auto home = detail::open(path);
      auto away = detail::open(metrica_away_path(path));
      return merge_metrica(read_metrica_team(home, "Home", Team::kTeam1, pitch),
                           read_metrica_team(away, "Away", Team::kTeam2, pitch));
    }
  }
  return {};
}

inline std::vector<EventRecord> load_events(const std::string& path, const std::string& format,
                                            const PitchConfig& pitch = {}) {
  auto in = detail::open(path);
  if (parse_tracking_format(format) == TrackingFormat::kMetrica) return read_metrica_events(in, pitch);
  return read_events_csv(in);
}

inline void save_tracking(const std::string& path, const std::vector<TrackingFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_tracking_csv(out, frames);
}

inline void save_events(const std::string& path, const std::vector<EventRecord>& events) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_events_csv(out, events);
}

}  // namespace balltraj::data
