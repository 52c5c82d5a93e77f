#include "markovcheck/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace markovcheck {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, int line_no, const char* what) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw DataError("line " + std::to_string(line_no) + ": malformed " +
                        std::string(what) + " value '" + s + "'");
    return v;
}

long parse_int(const std::string& s, int line_no, const char* what) {
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw DataError("line " + std::to_string(line_no) + ": malformed " +
                        std::string(what) + " value '" + s + "'");
    return v;
}

struct RawTrajectory {
    std::string id;
    std::vector<std::vector<double>> states;
    std::vector<int> actions;
    std::vector<std::optional<double>> rewards;
    std::vector<int> times;
};

}  // namespace

LoadResult load_dataset(std::istream& in, const CsvSchema& schema) {
    if (schema.state_dim < 1) throw DataError("schema must declare state_dim >= 1");
    if (schema.action_count < 1) throw DataError("schema must declare action_count >= 1");
    const int p = schema.state_dim;
    const std::size_t expected_fields = static_cast<std::size_t>(p) + 4;

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty input: missing header row");
    {
        auto header = split_row(line);
        if (header.size() != expected_fields || header[0] != "traj_id" || header[1] != "t" ||
            header[p + 2] != "action" || header[p + 3] != "reward")
            throw DataError("unexpected header; want traj_id,t,s_1,...,s_" +
                            std::to_string(p) + ",action,reward");
    }

    std::vector<RawTrajectory> raw;
    std::vector<std::string> order;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_row(line);
        if (fields.size() != expected_fields)
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected_fields) + " fields, got " +
                            std::to_string(fields.size()));
        const std::string& id = fields[0];
        auto it = std::find(order.begin(), order.end(), id);
        std::size_t slot;
        if (it == order.end()) {
            slot = raw.size();
            order.push_back(id);
            raw.push_back(RawTrajectory{id, {}, {}, {}, {}});
        } else {
            slot = static_cast<std::size_t>(it - order.begin());
        }
        RawTrajectory& traj = raw[slot];

        traj.times.push_back(static_cast<int>(parse_int(fields[1], line_no, "time index")));
        std::vector<double> state(p);
        for (int c = 0; c < p; ++c) {
            state[c] = parse_double(fields[2 + c], line_no, "state");
            if (!std::isfinite(state[c]))
                throw DataError("line " + std::to_string(line_no) + ": non-finite state");
        }
        traj.states.push_back(std::move(state));
        long action = parse_int(fields[p + 2], line_no, "action");
        if (action < 0 || action >= schema.action_count)
            throw DataError("line " + std::to_string(line_no) + ": trajectory '" + id +
                            "' action " + std::to_string(action) +
                            " outside declared set of size " +
                            std::to_string(schema.action_count));
        traj.actions.push_back(static_cast<int>(action));
        if (fields[p + 3].empty()) {
            traj.rewards.push_back(std::nullopt);
        } else {
            double r = parse_double(fields[p + 3], line_no, "reward");
            if (!std::isfinite(r))
                throw DataError("line " + std::to_string(line_no) + ": non-finite reward");
            traj.rewards.push_back(r);
        }
    }
    if (raw.empty()) throw DataError("no trajectory rows found");

    // Sort each trajectory by t and check contiguity from 0.
    int min_horizon = -1;
    for (RawTrajectory& traj : raw) {
        std::vector<std::size_t> idx(traj.times.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return traj.times[a] < traj.times[b]; });
        RawTrajectory sorted{traj.id, {}, {}, {}, {}};
        for (std::size_t i : idx) {
            sorted.times.push_back(traj.times[i]);
            sorted.states.push_back(std::move(traj.states[i]));
            sorted.actions.push_back(traj.actions[i]);
            sorted.rewards.push_back(traj.rewards[i]);
        }
        for (std::size_t i = 0; i < sorted.times.size(); ++i)
            if (sorted.times[i] != static_cast<int>(i))
                throw DataError("trajectory '" + traj.id +
                                "': time indices must be contiguous from 0 (missing or duplicate t=" +
                                std::to_string(i) + ")");
        int T = static_cast<int>(sorted.times.size()) - 1;
        if (T < 0) throw DataError("trajectory '" + traj.id + "' has no rows");
        // Rewards must be present everywhere except possibly the final row.
        for (int t = 0; t < T; ++t)
            if (!sorted.rewards[t].has_value())
                throw DataError("trajectory '" + traj.id + "': missing reward at t=" +
                                std::to_string(t));
        if (min_horizon < 0 || T < min_horizon) min_horizon = T;
        traj = std::move(sorted);
    }

    int target = schema.horizon.value_or(min_horizon);
    if (target < 1)
        throw DataError("common horizon must be at least 1 (got " + std::to_string(target) + ")");
    if (target > min_horizon)
        throw DataError("requested horizon " + std::to_string(target) +
                        " exceeds shortest trajectory horizon " + std::to_string(min_horizon));

    LoadResult result;
    result.data.state_dim = p;
    result.data.action_count = schema.action_count;
    result.data.horizon = target;
    for (RawTrajectory& traj : raw) {
        int T = static_cast<int>(traj.times.size()) - 1;
        if (T > target) ++result.truncated_trajectories;
        Trajectory out;
        out.id = traj.id;
        out.states.resize(target + 1, p);
        out.actions.resize(target + 1);
        out.rewards.resize(target);
        for (int t = 0; t <= target; ++t) {
            for (int c = 0; c < p; ++c) out.states(t, c) = traj.states[t][c];
            out.actions[t] = traj.actions[t];
            if (t < target) out.rewards[t] = *traj.rewards[t];
        }
        result.data.trajectories.push_back(std::move(out));
    }
    result.data.validate();
    return result;
}

LoadResult load_dataset_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return load_dataset(in, schema);
}

void write_dataset(std::ostream& out, const Dataset& d) {
    out << "traj_id,t";
    for (int c = 1; c <= d.state_dim; ++c) out << ",s_" << c;
    out << ",action,reward\n";
    char buf[40];
    for (const Trajectory& traj : d.trajectories) {
        for (int t = 0; t <= d.horizon; ++t) {
            out << traj.id << ',' << t;
            for (int c = 0; c < d.state_dim; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", traj.states(t, c));
                out << ',' << buf;
            }
            out << ',' << traj.actions[t] << ',';
            if (t < d.horizon) {
                std::snprintf(buf, sizeof(buf), "%.17g", traj.rewards[t]);
                out << buf;
            }
            out << '\n';
        }
    }
}

void write_dataset_file(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_dataset(out, d);
}

}  // namespace markovcheck
