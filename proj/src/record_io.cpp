#include "energyshield/record_io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "energyshield/errors.hpp"

namespace energyshield {

const char* const kEpisodeColumns =
    "n,x,y,psi,v,obstacle,r,xi,h,delta_max,delta_hat,decision,phase,a,beta,energy_mj,kind,realized_response";

namespace {

void put(std::string& s, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += buf;
}

void put(std::string& s, long long v) { s += std::to_string(v); }

double to_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("episode csv: bad number '" + s + "'");
    return v;
}

long long to_int(const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("episode csv: bad integer '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s) {
    const bool hex = s.rfind("0x", 0) == 0;
    const char* first = s.data() + (hex ? 2 : 0);
    std::uint64_t v = 0;
    const auto res = std::from_chars(first, s.data() + s.size(), v, hex ? 16 : 10);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("episode csv: bad integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

void write_episode_csv(std::ostream& out, const EpisodeRecord& rec, const Provenance& prov) {
    std::string s;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(prov.config_hash));
    s += "# config_hash=0x";
    s += buf;
    s += "\n# seed_base=" + std::to_string(prov.seed_base);
    s += "\n# seed=" + std::to_string(rec.seed);
    s += "\n# episode=" + std::to_string(rec.episode);
    s += std::string("\n# policy=") + policy_name(rec.policy);
    s += std::string("\n# shield=") + (rec.shield ? "1" : "0");
    s += std::string("\n# noisy=") + (rec.noisy ? "1" : "0");
    s += "\n# controller=" + rec.controller;
    s += std::string("\n# outcome=") + outcome_name(rec.outcome);
    s += "\n# note=" + one_line(rec.note);
    s += "\n# obstacles=";
    for (std::size_t i = 0; i < rec.obstacles.size(); ++i) {
        if (i) s += ';';
        put(s, rec.obstacles[i].x);
        s += ':';
        put(s, rec.obstacles[i].y);
    }
    s += '\n';
    s += kEpisodeColumns;
    s += '\n';
    out << s;
    for (const auto& row : rec.rows) {
        s.clear();
        put(s, static_cast<long long>(row.n));
        for (double v : {row.pose.x, row.pose.y, row.pose.psi, row.pose.v}) {
            s += ',';
            put(s, v);
        }
        s += ',';
        put(s, static_cast<long long>(row.obstacle));
        for (double v : {row.r, row.xi, row.h}) {
            s += ',';
            put(s, v);
        }
        s += ',';
        put(s, static_cast<long long>(row.delta_max));
        s += ',';
        put(s, static_cast<long long>(row.delta_hat));
        s += ',';
        s += decision_name(row.decision);
        s += ',';
        s += row.phase;
        for (double v : {row.applied.a, row.applied.beta, row.energy}) {
            s += ',';
            put(s, v);
        }
        s += ',';
        s += window_kind_name(row.kind);
        s += ',';
        put(s, static_cast<long long>(row.realized_response));
        s += '\n';
        out << s;
    }
}

std::string episode_csv(const EpisodeRecord& rec, const Provenance& prov) {
    std::ostringstream ss;
    write_episode_csv(ss, rec, prov);
    return ss.str();
}

EpisodeRecord read_episode_csv(std::istream& in, Provenance* prov) {
    EpisodeRecord rec;
    Provenance p;
    std::string line;
    bool header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            if (line[0] == '#') {
                const auto eq = line.find('=');
                if (eq == std::string::npos || line.size() < 2) continue;
                const std::string key = line.substr(2, eq - 2);
                const std::string val = line.substr(eq + 1);
                if (key == "config_hash") p.config_hash = to_u64(val);
                else if (key == "seed_base") p.seed_base = to_u64(val);
                else if (key == "seed") rec.seed = to_u64(val);
                else if (key == "episode") rec.episode = static_cast<int>(to_int(val));
                else if (key == "policy") rec.policy = parse_policy(val);
                else if (key == "shield") rec.shield = val == "1";
                else if (key == "noisy") rec.noisy = val == "1";
                else if (key == "controller") rec.controller = val;
                else if (key == "outcome") rec.outcome = parse_outcome(val);
                else if (key == "note") rec.note = val;
                else if (key == "obstacles" && !val.empty()) {
                    for (const auto& item : split(val, ';')) {
                        const auto xy = split(item, ':');
                        if (xy.size() != 2) throw ConfigError("episode csv: bad obstacle '" + item + "'");
                        rec.obstacles.push_back({to_double(xy[0]), to_double(xy[1])});
                    }
                }
                continue;
            }
            if (!header) {
                if (line != kEpisodeColumns) throw ConfigError("episode csv: unexpected column header");
                header = true;
                continue;
            }
            const auto f = split(line, ',');
            if (f.size() != 18) throw ConfigError("episode csv: expected 18 fields");
            StepRow row;
            row.n = static_cast<int>(to_int(f[0]));
            row.pose = {to_double(f[1]), to_double(f[2]), to_double(f[3]), to_double(f[4])};
            row.obstacle = static_cast<int>(to_int(f[5]));
            row.r = to_double(f[6]);
            row.xi = to_double(f[7]);
            row.h = to_double(f[8]);
            row.delta_max = static_cast<int>(to_int(f[9]));
            row.delta_hat = static_cast<int>(to_int(f[10]));
            row.decision = parse_decision(f[11]);
            row.phase = f[12];
            row.applied = {to_double(f[13]), to_double(f[14])};
            row.energy = to_double(f[15]);
            row.kind = parse_window_kind(f[16]);
            row.realized_response = static_cast<int>(to_int(f[17]));
            rec.rows.push_back(row);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " at line " + std::to_string(line_no));
        }
    }
    if (!header) throw ConfigError("episode csv: missing column header");
    if (prov) *prov = p;
    return rec;
}

EpisodeRecord parse_episode_csv(const std::string& text, Provenance* prov) {
    std::istringstream ss(text);
    return read_episode_csv(ss, prov);
}

std::string episode_file_name(const EpisodeRecord& rec) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s_S%d_N%d_%s_ep%04d.csv", policy_name(rec.policy), rec.shield ? 1 : 0,
                  rec.noisy ? 1 : 0, rec.controller.c_str(), rec.episode);
    return buf;
}

}  // namespace energyshield
