// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "chainsim.hpp"
#include "manifest.hpp"
#include "maxrate.hpp"

namespace uweb::sim {

// ---- deterministic randomness ----------------------------------------------

class rng64 {
public:
    explicit rng64(std::uint64_t seed) : eng_(seed) {}

    // Uniform double in [0, 1) with platform-independent construction.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + unit() * (hi - lo); }

    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + static_cast<std::uint64_t>(unit() * static_cast<double>(hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
};

// ---- workload specification -------------------------------------------------

enum class writer_mode {
    spend_only,    // inject only the spending transactions (pre-funded writers)
    full_construct // preparing/funding/spending cascade with confirmation gating
};

struct writer_spec {
    std::size_t count = 0;
    std::uint64_t payload_bytes = 380'005; // per writer
    double window_seconds = 14'400;
    double window_start = 0;
    writer_mode mode = writer_mode::spend_only;
};

struct financial_profile {
    double txs_per_epoch = 30;  // average across all epochs
    std::size_t size_min = 240; // bytes
    std::size_t size_max = 1'500;
    double fee_min = 1.5; // base units per byte, strictly above the relay floor
    double fee_max = 4.0;
    double duty_cycle = 1.0; // fraction of epochs carrying traffic (bursty when < 1)
    double multiplier = 1.0;
    double duration_seconds = 129'600;
    std::size_t min_rate_count = 0; // transactions pinned at exactly the floor rate
};

// A previously exported construct manifest injected as a writer: its real
// transaction sizes, fees, and dependencies enter the schedule at `time`.
struct manifest_injection {
    std::string file;
    double time = 0;
    std::optional<construct_manifest> manifest; // pre-loaded when file is empty
};

struct workload_spec {
    writer_spec writers;
    financial_profile financial;
    std::vector<manifest_injection> constructs;
    double epoch_seconds = 150.0;
    std::uint64_t seed = 1;
    std::size_t max_epochs = 100'000;
};

// ---- JSON round-trip ---------------------------------------------------------

inline nlohmann::json workload_to_json(const workload_spec& w) {
    nlohmann::json j{
        {"seed", w.seed},
        {"epoch_seconds", w.epoch_seconds},
        {"max_epochs", w.max_epochs},
        {"writers",
         {{"count", w.writers.count},
          {"payload", w.writers.payload_bytes},
          {"window", w.writers.window_seconds},
          {"start", w.writers.window_start},
          {"mode", w.writers.mode == writer_mode::spend_only ? "spend-only" : "full-construct"}}},
        {"financial",
         {{"txs_per_epoch", w.financial.txs_per_epoch},
          {"size_min", w.financial.size_min},
          {"size_max", w.financial.size_max},
          {"fee_min", w.financial.fee_min},
          {"fee_max", w.financial.fee_max},
          {"duty_cycle", w.financial.duty_cycle},
          {"multiplier", w.financial.multiplier},
          {"duration", w.financial.duration_seconds},
          {"min_rate_count", w.financial.min_rate_count}}}};
    if (!w.constructs.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& c : w.constructs)
            arr.push_back({{"file", c.file}, {"time", c.time}});
        j["constructs"] = arr;
    }
    return j;
}

inline workload_spec workload_from_json(const nlohmann::json& j) {
    workload_spec w;
    w.seed = j.value("seed", std::uint64_t{1});
    w.epoch_seconds = j.value("epoch_seconds", 150.0);
    w.max_epochs = j.value("max_epochs", std::size_t{100'000});
    if (w.epoch_seconds <= 0) throw std::invalid_argument("epoch_seconds must be positive");
    if (j.contains("writers")) {
        const auto& ws = j.at("writers");
        w.writers.count = ws.value("count", std::size_t{0});
        w.writers.payload_bytes = ws.value("payload", std::uint64_t{380'005});
        w.writers.window_seconds = ws.value("window", 14'400.0);
        w.writers.window_start = ws.value("start", 0.0);
        std::string mode = ws.value("mode", "spend-only");
        if (mode == "spend-only")
            w.writers.mode = writer_mode::spend_only;
        else if (mode == "full-construct")
            w.writers.mode = writer_mode::full_construct;
        else
            throw std::invalid_argument("unknown writer mode: " + mode);
        if (w.writers.count > 0 && w.writers.payload_bytes == 0)
            throw std::invalid_argument("writer payload must be positive");
        if (w.writers.window_seconds < 0)
            throw std::invalid_argument("writer window must be non-negative");
    }
    if (j.contains("financial")) {
        const auto& f = j.at("financial");
        w.financial.txs_per_epoch = f.value("txs_per_epoch", 30.0);
        w.financial.size_min = f.value("size_min", std::size_t{240});
        w.financial.size_max = f.value("size_max", std::size_t{1'500});
        w.financial.fee_min = f.value("fee_min", 1.5);
        w.financial.fee_max = f.value("fee_max", 4.0);
        w.financial.duty_cycle = f.value("duty_cycle", 1.0);
        w.financial.multiplier = f.value("multiplier", 1.0);
        w.financial.duration_seconds = f.value("duration", 129'600.0);
        w.financial.min_rate_count = f.value("min_rate_count", std::size_t{0});
        if (w.financial.size_min == 0 || w.financial.size_max < w.financial.size_min)
            throw std::invalid_argument("bad financial size range");
        if (w.financial.fee_min < 1.0 || w.financial.fee_max < w.financial.fee_min)
            throw std::invalid_argument("bad financial fee range");
        if (w.financial.duty_cycle <= 0 || w.financial.duty_cycle > 1.0)
            throw std::invalid_argument("duty_cycle must be in (0, 1]");
    }
    if (j.contains("constructs")) {
        for (const auto& c : j.at("constructs")) {
            manifest_injection inj;
            inj.file = c.value("file", "");
            inj.time = c.value("time", 0.0);
            if (inj.file.empty()) throw std::invalid_argument("construct injection needs a file");
            w.constructs.push_back(std::move(inj));
        }
    }
    return w;
}

inline workload_spec load_workload(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return workload_from_json(j);
}

// ---- trace generation ---------------------------------------------------------

struct scheduled_tx {
    double time = 0; // submission time for parent-free txs
    sim_tx tx;
    std::vector<std::size_t> dependents; // indices into the schedule
    std::size_t pending_parents = 0;
};

// Financial transactions: uniform arrivals inside traffic-carrying epochs.
// With duty_cycle < 1 traffic clusters into every k-th epoch, which leaves
// the remaining block space free in quiet epochs.
inline void generate_financial(const financial_profile& f, double epoch_seconds, rng64& rng,
                               std::vector<scheduled_tx>& out) {
    std::size_t epochs = static_cast<std::size_t>(f.duration_seconds / epoch_seconds);
    std::size_t period = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / f.duty_cycle)));
    double per_burst = f.txs_per_epoch * static_cast<double>(period) * f.multiplier;
    std::uint64_t n = 0;
    std::size_t pinned = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
        if (e % period != 0) continue;
        auto count = static_cast<std::size_t>(per_burst);
        if (rng.unit() < per_burst - std::floor(per_burst)) ++count;
        for (std::size_t i = 0; i < count; ++i) {
            scheduled_tx s;
            s.time = static_cast<double>(e) * epoch_seconds + rng.unit() * epoch_seconds;
            std::size_t size = rng.uniform_int(f.size_min, f.size_max);
            double rate = pinned < f.min_rate_count ? 1.0 : rng.uniform(f.fee_min, f.fee_max);
            if (pinned < f.min_rate_count) ++pinned;
            s.tx.id = synth_txid("fin", n, 0);
            s.tx.size = size;
            s.tx.fee = static_cast<amount>(std::ceil(rate * static_cast<double>(size)));
            s.tx.klass = tx_class::financial;
            out.push_back(std::move(s));
            ++n;
        }
    }
}

// Writer workload synthesized from the construct planner, so simulated
// transaction sizes and fees are the exact built sizes.
inline void generate_writers(const writer_spec& w, rng64& rng, std::vector<scheduled_tx>& out) {
    if (w.count == 0) return;
    maxrate::construct_plan plan = maxrate::plan_construct(w.payload_bytes);
    for (std::size_t writer = 0; writer < w.count; ++writer) {
        if (w.mode == writer_mode::spend_only) {
            // The pre-funded case: each spending transaction lands at an
            // independent random time inside the write window.
            for (std::size_t i = 0; i < plan.spending_txs.size(); ++i) {
                scheduled_tx s;
                s.time = w.window_start + rng.unit() * w.window_seconds;
                s.tx.id = synth_txid("spend", writer, i);
                s.tx.size = plan.spending_txs[i].size;
                s.tx.fee = plan.spending_txs[i].fee;
                s.tx.klass = tx_class::maxrate;
                out.push_back(std::move(s));
            }
            continue;
        }

        // Full cascade: the writer starts at a random time; each stage is
        // released at the first epoch boundary after its parents confirm.
        double start = w.window_start + rng.unit() * w.window_seconds;
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> node_at; // (level,i) -> idx
        std::size_t depth = plan.preparing_level_counts.size();
        for (std::size_t level = 0; level < depth; ++level) {
            std::size_t nodes = plan.preparing_level_counts[level];
            std::size_t child_count = level + 1 < depth ? plan.preparing_level_counts[level + 1]
                                                        : plan.funding_tx_count();
            for (std::size_t ni = 0; ni < nodes; ++ni) {
                std::size_t first = ni * maxrate::max_data_outputs_per_funding_tx;
                std::size_t fanout = std::min(maxrate::max_data_outputs_per_funding_tx,
                                              child_count - first);
                scheduled_tx s;
                s.time = start;
                s.tx.id = synth_txid("prep", (writer << 8) | level, ni);
                s.tx.size = maxrate::fan_out_tx_size(fanout + 1);
                s.tx.fee = static_cast<amount>(s.tx.size);
                s.tx.klass = tx_class::maxrate;
                if (level > 0) {
                    std::size_t parent =
                        node_at.at({level - 1, ni / maxrate::max_data_outputs_per_funding_tx});
                    s.tx.parents.push_back(out[parent].tx.id);
                    s.pending_parents = 1;
                    out[parent].dependents.push_back(out.size());
                }
                node_at[{level, ni}] = out.size();
                out.push_back(std::move(s));
            }
        }
        std::vector<std::size_t> funding_at(plan.funding_tx_count());
        for (std::size_t j = 0; j < plan.funding_tx_count(); ++j) {
            scheduled_tx s;
            s.time = start;
            s.tx.id = synth_txid("fund", writer, j);
            s.tx.size = plan.funding_tx_sizes[j];
            s.tx.fee = static_cast<amount>(s.tx.size);
            s.tx.klass = tx_class::maxrate;
            if (depth > 0) {
                std::size_t parent =
                    node_at.at({depth - 1, j / maxrate::max_data_outputs_per_funding_tx});
                s.tx.parents.push_back(out[parent].tx.id);
                s.pending_parents = 1;
                out[parent].dependents.push_back(out.size());
            }
            funding_at[j] = out.size();
            out.push_back(std::move(s));
        }
        for (std::size_t i = 0; i < plan.spending_txs.size(); ++i) {
            const auto& sp = plan.spending_txs[i];
            scheduled_tx s;
            s.time = start;
            s.tx.id = synth_txid("spend", writer, i);
            s.tx.size = sp.size;
            s.tx.fee = sp.fee;
            s.tx.klass = tx_class::maxrate;
            std::size_t parent = funding_at[sp.funding_tx];
            s.tx.parents.push_back(out[parent].tx.id);
            s.pending_parents = 1;
            out[parent].dependents.push_back(out.size());
            out.push_back(std::move(s));
        }
    }
}

// Schedules the transactions of an exported construct: sizes are the real
// serialized sizes, fees are derived from in-manifest funding values, and
// each stage is gated on its in-manifest parents confirming.
inline void inject_manifest(const construct_manifest& m, double time,
                            std::vector<scheduled_tx>& out) {
    std::unordered_map<txid_t, std::size_t, txid_hasher> at;
    std::unordered_map<txid_t, const transaction*, txid_hasher> bodies;
    for (const auto& e : m.entries) bodies[txid_t::from_display(e.txid)] = &e.tx;
    for (const auto& e : m.entries) {
        scheduled_tx s;
        s.time = time;
        s.tx.id = txid_t::from_display(e.txid);
        s.tx.size = e.tx.serialized_size();
        s.tx.klass = tx_class::maxrate;
        amount in_total = 0;
        bool values_known = true;
        std::unordered_set<txid_t, txid_hasher> seen_parents;
        for (const auto& in : e.tx.inputs) {
            auto body = bodies.find(in.prevout.txid);
            if (body == bodies.end()) {
                values_known = false; // the external source input
                continue;
            }
            if (in.prevout.index < body->second->outputs.size())
                in_total += body->second->outputs[in.prevout.index].value;
            auto pit = at.find(in.prevout.txid);
            if (pit != at.end() && seen_parents.insert(in.prevout.txid).second) {
                s.tx.parents.push_back(in.prevout.txid);
                ++s.pending_parents;
                out[pit->second].dependents.push_back(out.size());
            }
        }
        amount fee = values_known ? in_total - e.tx.output_total()
                                  : static_cast<amount>(s.tx.size);
        s.tx.fee = std::max(fee, static_cast<amount>(s.tx.size));
        at[s.tx.id] = out.size();
        out.push_back(std::move(s));
    }
}

// ---- the run loop --------------------------------------------------------------

struct run_result {
    sim_stats stats;
    utilization_result utilization;
    std::size_t epochs = 0;
    std::size_t rejected = 0;
};

inline run_result run_workload(const workload_spec& w) {
    // Independent streams per component: the financial trace must not depend
    // on how many draws the writer generator consumed.
    rng64 writer_rng(w.seed ^ 0x9e3779b97f4a7c15ull);
    rng64 financial_rng(w.seed ^ 0xc2b2ae3d27d4eb4full);
    std::vector<scheduled_tx> schedule;
    generate_writers(w.writers, writer_rng, schedule);
    generate_financial(w.financial, w.epoch_seconds, financial_rng, schedule);
    for (const auto& inj : w.constructs) {
        if (inj.manifest)
            inject_manifest(*inj.manifest, inj.time, schedule);
        else
            inject_manifest(load_manifest(inj.file), inj.time, schedule);
    }

    // Submission queue ordered by (time, schedule index). Dependent stages
    // are released at the boundary that confirms their parents.
    std::multimap<std::pair<time_us, std::size_t>, std::size_t> queue;
    std::unordered_map<txid_t, std::size_t, txid_hasher> by_id;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        by_id[schedule[i].tx.id] = i;
        if (schedule[i].pending_parents == 0)
            queue.emplace(std::make_pair(to_us(schedule[i].time), i), i);
    }

    chain c(chain_params{w.epoch_seconds});
    run_result result;
    std::size_t epoch = 0;
    while ((!queue.empty() || c.mempool_count() > 0) && epoch < w.max_epochs) {
        double boundary = static_cast<double>(++epoch) * w.epoch_seconds;
        time_us boundary_us = to_us(boundary);
        while (!queue.empty() && queue.begin()->first.first < boundary_us) {
            std::size_t idx = queue.begin()->second;
            queue.erase(queue.begin());
            auto res = c.submit(schedule[idx].tx, schedule[idx].time);
            if (!res.accepted) ++result.rejected;
        }
        const block& b = c.mine(boundary);
        for (const auto& mined : b.txs) {
            auto it = by_id.find(mined.id);
            if (it == by_id.end()) continue;
            for (std::size_t dep : schedule[it->second].dependents) {
                if (--schedule[dep].pending_parents == 0) {
                    schedule[dep].time = boundary + 1e-6;
                    queue.emplace(std::make_pair(to_us(schedule[dep].time), dep), dep);
                }
            }
        }
    }
    result.stats = c.stats();
    result.utilization = compute_utilization(result.stats.blocks);
    result.epochs = epoch;
    return result;
}

// ---- scenario presets ------------------------------------------------------------

// Concurrent-writer scaling: n pre-funded writers each storing a 400KB
// article bundle (380,005 bytes gzipped) inside the same 4-hour window,
// over a light bursty financial background.
inline workload_spec writer_scaling_scenario(std::size_t writers, std::uint64_t seed) {
    workload_spec w;
    w.seed = seed;
    w.writers.count = writers;
    w.writers.payload_bytes = 380'005;
    w.writers.window_seconds = 14'400;
    w.writers.mode = writer_mode::spend_only;
    w.financial.txs_per_epoch = 2;
    w.financial.size_min = 240;
    w.financial.size_max = 560;
    w.financial.duty_cycle = 0.2;
    w.financial.duration_seconds = 216'000; // 60 hours
    return w;
}

// Financial-multiplier stress: the 140MB write burst (359 writers) against a
// 36-hour financial trace at the given density multiplier.
inline workload_spec financial_multiplier_scenario(double multiplier, std::uint64_t seed) {
    workload_spec w;
    w.seed = seed;
    w.writers.count = 359;
    w.writers.payload_bytes = 380'005;
    w.writers.window_seconds = 600;
    w.writers.mode = writer_mode::spend_only;
    w.financial.txs_per_epoch = 30;
    w.financial.size_min = 400;
    w.financial.size_max = 1'200;
    w.financial.multiplier = multiplier;
    w.financial.duration_seconds = 129'600; // 36 hours
    return w;
}

// Writing-heavy utilization scenario: full construct cascades for 359
// writers against a heavier financial mix.
inline workload_spec utilization_scenario(std::uint64_t seed) {
    workload_spec w;
    w.seed = seed;
    w.writers.count = 359;
    w.writers.payload_bytes = 380'005;
    w.writers.window_seconds = 600;
    w.writers.mode = writer_mode::full_construct;
    w.financial.txs_per_epoch = 30;
    w.financial.size_min = 682;
    w.financial.size_max = 8'418;
    w.financial.duration_seconds = 43'200; // 12 hours
    return w;
}

// ---- CSV export --------------------------------------------------------------------

inline void write_tx_csv(const sim_stats& s, std::ostream& out) {
    out << "class,txid,size,fee,fee_rate,submit_s,confirm_s,delay_s,height,rejected,reason\n";
    for (const auto& r : s.txs) {
        out << to_string(r.klass) << ',' << r.txid << ',' << r.size << ',' << r.fee << ','
            << r.fee_rate << ',' << r.submit_s << ',' << r.confirm_s << ',' << r.delay() << ','
            << r.height << ',' << (r.rejected ? 1 : 0) << ',' << r.reject_reason << '\n';
    }
}

inline void write_block_csv(const sim_stats& s, std::ostream& out) {
    out << "height,time_s,total_size,tx_count,payload_bytes,payload_txs,space_util,txn_util\n";
    for (const auto& b : s.blocks) {
        double space = b.total_size ? static_cast<double>(b.payload_bytes) /
                                          static_cast<double>(b.total_size)
                                    : 0.0;
        double txn = b.tx_count ? static_cast<double>(b.payload_txs) /
                                      static_cast<double>(b.tx_count)
                                : 0.0;
        out << b.height << ',' << b.time_s << ',' << b.total_size << ',' << b.tx_count << ','
            << b.payload_bytes << ',' << b.payload_txs << ',' << space << ',' << txn << '\n';
    }
}

inline void write_csv_file(const std::string& path,
                           const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    writer(out);
}

} // namespace uweb::sim
