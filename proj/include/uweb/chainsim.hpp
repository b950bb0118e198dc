// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hash.hpp"
#include "standardness.hpp"
#include "tx.hpp"

namespace uweb::sim {

// Deterministic mempool-and-miner model: fixed-length confirmation epochs,
// greedy fee-rate block building with arrival-time tie-breaks, first-seen
// double-spend resolution and per-package ancestor limits. Transactions are
// either byte-true (full body, validated against the relay policy) or
// synthetic metadata records (size/fee only) for large-scale workloads.

using time_us = std::int64_t;
constexpr time_us second_us = 1'000'000;

inline time_us to_us(double seconds) {
    return static_cast<time_us>(std::llround(seconds * 1e6));
}

enum class tx_class { financial, maxrate, uweb, attack, genesis };

inline const char* to_string(tx_class c) {
    switch (c) {
        case tx_class::financial: return "financial";
        case tx_class::maxrate: return "maxrate";
        case tx_class::uweb: return "uweb";
        case tx_class::attack: return "attack";
        case tx_class::genesis: return "genesis";
    }
    return "unknown";
}

inline bool is_payload_class(tx_class c) {
    return c == tx_class::maxrate || c == tx_class::uweb || c == tx_class::attack;
}

struct sim_tx {
    txid_t id;
    std::size_t size = 0;
    amount fee = 0;
    tx_class klass = tx_class::financial;
    std::vector<txid_t> parents;         // explicit dependencies (synthetic path)
    std::optional<transaction> full;     // byte-true body
};

// Synthetic txid for metadata-only transactions.
inline txid_t synth_txid(std::string_view tag, std::uint64_t a, std::uint64_t b) {
    byte_writer w;
    w.raw(to_bytes(tag));
    w.u64le(a);
    w.u64le(b);
    return txid_t{sha256_digest(w.data())};
}

struct submit_result {
    bool accepted = false;
    std::string reason; // rule id when rejected
};

struct mined_ref {
    txid_t id;
    std::size_t size = 0;
    amount fee = 0;
    tx_class klass = tx_class::financial;
};

struct block {
    std::size_t height = 0;
    double time_s = 0;
    std::size_t total_size = 0; // includes the coinbase allotment
    std::vector<mined_ref> txs; // excludes coinbase, in topological greedy order
};

struct tx_record {
    std::string txid;
    tx_class klass = tx_class::financial;
    std::size_t size = 0;
    amount fee = 0;
    double fee_rate = 0;
    double submit_s = -1;
    double confirm_s = -1; // -1 while unconfirmed
    long long height = -1;
    bool rejected = false;
    std::string reject_reason;

    double delay() const { return confirm_s >= 0 ? confirm_s - submit_s : -1; }
};

struct block_row {
    std::size_t height = 0;
    double time_s = 0;
    std::size_t total_size = 0;
    std::size_t tx_count = 0; // includes coinbase
    std::uint64_t payload_bytes = 0;
    std::size_t payload_txs = 0;
};

struct mempool_sample {
    double time_s = 0;
    std::size_t count = 0;
    std::uint64_t bytes = 0;
};

struct sim_stats {
    std::vector<tx_record> txs;
    std::vector<block_row> blocks;
    std::vector<mempool_sample> timeline;
    std::uint64_t peak_mempool_bytes = 0;
    std::size_t peak_mempool_count = 0;

    std::vector<double> delays(tx_class c) const {
        std::vector<double> out;
        for (const auto& r : txs)
            if (r.klass == c && !r.rejected && r.confirm_s >= 0) out.push_back(r.delay());
        return out;
    }

    static double mean(const std::vector<double>& v) {
        if (v.empty()) return 0;
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    }

    static double max(const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m = std::max(m, x);
        return m;
    }
};

struct chain_params {
    double epoch_seconds = 150.0;
    std::size_t max_block_size = policy::max_block_size;
    std::size_t coinbase_size = 250;
};

class chain {
public:
    explicit chain(chain_params params = {}) : params_(params) {
        if (params_.epoch_seconds <= 0) throw std::invalid_argument("epoch must be positive");
    }

    const chain_params& params() const { return params_; }

    // ---- funding the model world ----------------------------------------

    // Mints confirmed outputs outside the normal admission path (a genesis
    // allocation). Returns the created outpoints.
    std::vector<outpoint> grant(std::size_t count, amount value, const script& script_pubkey) {
        transaction tx;
        tx_input in;
        in.prevout = {txid_t{}, 0xffffffff};
        in.script_sig.add(script_op::push_direct(bytes{0x55, 0x57, 0x65, 0x62}));
        tx.inputs.push_back(std::move(in));
        for (std::size_t i = 0; i < count; ++i) tx.outputs.push_back({value, script_pubkey});
        adopt_confirmed(tx, tx_class::genesis);
        std::vector<outpoint> out;
        txid_t id = tx.txid();
        for (std::size_t i = 0; i < count; ++i)
            out.push_back({id, static_cast<std::uint32_t>(i)});
        return out;
    }

    // Adopts a fully-formed transaction as confirmed (attack fixtures).
    txid_t adopt_confirmed(const transaction& tx, tx_class klass) {
        txid_t id = tx.txid();
        if (confirmed_height_.count(id) || mempool_.count(id))
            throw std::invalid_argument("transaction already known");
        std::size_t h = blocks_.size();
        blocks_.push_back({h, current_time_s_, params_.coinbase_size + tx.serialized_size(),
                           {{id, tx.serialized_size(), 0, klass}}});
        confirmed_height_[id] = h;
        confirmed_txs_[id] = tx;
        index_outputs(tx, id);
        block_rows_.push_back({h, current_time_s_, blocks_.back().total_size, 2,
                               is_payload_class(klass) ? tx.serialized_size() : 0,
                               is_payload_class(klass) ? std::size_t{1} : std::size_t{0}});
        return id;
    }

    // ---- admission --------------------------------------------------------

    submit_result submit(const transaction& tx, tx_class klass, double t_seconds) {
        sim_tx s;
        s.id = tx.txid();
        s.size = tx.serialized_size();
        s.full = tx;
        s.klass = klass;
        return submit(std::move(s), t_seconds);
    }

    submit_result submit(sim_tx tx, double t_seconds) {
        time_us arrival = to_us(t_seconds);
        auto reject = [&](const std::string& rule) {
            tx_record r;
            r.txid = tx.id.display();
            r.klass = tx.klass;
            r.size = tx.size;
            r.fee = tx.fee;
            r.submit_s = t_seconds;
            r.rejected = true;
            r.reject_reason = rule;
            records_.push_back(std::move(r));
            return submit_result{false, rule};
        };

        if (mempool_.count(tx.id) || confirmed_height_.count(tx.id))
            return reject(rule::duplicate);

        std::vector<txid_t> parents;
        if (tx.full) {
            // Byte-true: resolve every input against the UTXO view, then run
            // the full relay policy with resolved values.
            tx.size = tx.full->serialized_size();
            std::unordered_map<outpoint, amount, outpoint_hasher> values;
            std::unordered_set<outpoint, outpoint_hasher> seen_inputs;
            for (const auto& in : tx.full->inputs) {
                const outpoint& op = in.prevout;
                if (!seen_inputs.insert(op).second) return reject(rule::double_spend);
                if (mempool_claims_.count(op)) return reject(rule::double_spend);
                if (auto it = utxo_.find(op); it != utxo_.end()) {
                    values[op] = it->second;
                    continue;
                }
                if (auto pit = mempool_.find(op.txid); pit != mempool_.end()) {
                    const auto& ptx = pit->second.tx;
                    if (ptx.full && op.index < ptx.full->outputs.size() &&
                        !ptx.full->outputs[op.index].script_pubkey.is_op_return()) {
                        values[op] = ptx.full->outputs[op.index].value;
                        parents.push_back(op.txid);
                        continue;
                    }
                }
                if (spent_confirmed_.count(op)) return reject(rule::double_spend);
                return reject(rule::missing_input);
            }
            chain_context ctx;
            ctx.input_value = [&](const outpoint& op) -> std::optional<amount> {
                auto it = values.find(op);
                if (it == values.end()) return std::nullopt;
                return it->second;
            };
            auto report = check_standard(*tx.full, ctx);
            if (!report.passed) return reject(report.violations.front());
            tx.fee = report.fee.value_or(0);
        } else {
            if (tx.size == 0) return reject(rule::no_inputs);
            if (tx.size > policy::max_tx_size) return reject(rule::size);
            if (tx.fee < static_cast<amount>(tx.size) * policy::min_fee_rate)
                return reject(rule::min_fee);
            for (const auto& p : tx.parents) {
                if (confirmed_height_.count(p)) continue;
                if (mempool_.count(p)) {
                    parents.push_back(p);
                    continue;
                }
                return reject(rule::missing_input);
            }
        }

        // Unconfirmed-ancestor package limits, evaluated at submission.
        std::size_t ancestor_count = 1;
        std::uint64_t ancestor_bytes = tx.size;
        {
            std::unordered_set<txid_t, txid_hasher> seen;
            std::vector<txid_t> queue = parents;
            while (!queue.empty()) {
                txid_t cur = queue.back();
                queue.pop_back();
                if (!seen.insert(cur).second) continue;
                const auto& e = mempool_.at(cur);
                ++ancestor_count;
                ancestor_bytes += e.tx.size;
                for (const auto& p : e.parents) queue.push_back(p);
            }
        }
        if (ancestor_count > policy::max_ancestor_count) return reject(rule::chain_count);
        if (ancestor_bytes > policy::max_ancestor_size) return reject(rule::chain_size);

        entry e;
        e.tx = std::move(tx);
        e.parents = std::move(parents);
        e.arrival = arrival;
        e.seq = seq_counter_++;
        e.fee_rate = static_cast<double>(e.tx.fee) / static_cast<double>(e.tx.size);
        if (e.tx.full)
            for (const auto& in : e.tx.full->inputs) mempool_claims_[in.prevout] = e.tx.id;

        tx_record r;
        r.txid = e.tx.id.display();
        r.klass = e.tx.klass;
        r.size = e.tx.size;
        r.fee = e.tx.fee;
        r.fee_rate = e.fee_rate;
        r.submit_s = t_seconds;
        record_index_[e.tx.id] = records_.size();
        records_.push_back(std::move(r));

        mempool_bytes_ += e.tx.size;
        mempool_.emplace(e.tx.id, std::move(e));
        peak_mempool_bytes_ = std::max(peak_mempool_bytes_, mempool_bytes_);
        peak_mempool_count_ = std::max(peak_mempool_count_, mempool_.size());
        current_time_s_ = std::max(current_time_s_, t_seconds);
        return {true, ""};
    }

    // ---- mining -----------------------------------------------------------

    // Builds the block at timestamp t from transactions that arrived strictly
    // before t: greedy by fee rate, ties broken by arrival then submission
    // order, gated so ancestors are confirmed or earlier in the same block.
    const block& mine(double t_seconds) {
        time_us boundary = to_us(t_seconds);
        std::vector<const entry*> candidates;
        candidates.reserve(mempool_.size());
        for (const auto& [id, e] : mempool_)
            if (e.arrival < boundary) candidates.push_back(&e);
        std::sort(candidates.begin(), candidates.end(), [](const entry* a, const entry* b) {
            if (a->fee_rate != b->fee_rate) return a->fee_rate > b->fee_rate;
            if (a->arrival != b->arrival) return a->arrival < b->arrival;
            return a->seq < b->seq;
        });

        std::size_t budget = params_.max_block_size - params_.coinbase_size;
        std::vector<const entry*> added;
        std::unordered_set<txid_t, txid_hasher> in_block;
        bool progress = true;
        while (progress) {
            progress = false;
            for (const entry* e : candidates) {
                if (in_block.count(e->tx.id) || e->tx.size > budget) continue;
                bool ready = true;
                for (const auto& p : e->parents)
                    if (!confirmed_height_.count(p) && !in_block.count(p)) {
                        ready = false;
                        break;
                    }
                if (!ready) continue;
                in_block.insert(e->tx.id);
                added.push_back(e);
                budget -= e->tx.size;
                progress = true;
            }
        }

        block b;
        b.height = blocks_.size();
        b.time_s = t_seconds;
        b.total_size = params_.coinbase_size;
        block_row row{b.height, t_seconds, 0, 1, 0, 0};
        for (const entry* e : added) {
            b.txs.push_back({e->tx.id, e->tx.size, e->tx.fee, e->tx.klass});
            b.total_size += e->tx.size;
            ++row.tx_count;
            if (is_payload_class(e->tx.klass)) {
                row.payload_bytes += e->tx.size;
                ++row.payload_txs;
            }
        }
        row.total_size = b.total_size;

        for (const entry* e : added) {
            confirmed_height_[e->tx.id] = b.height;
            auto rit = record_index_.find(e->tx.id);
            records_[rit->second].confirm_s = t_seconds;
            records_[rit->second].height = static_cast<long long>(b.height);
            if (e->tx.full) {
                for (const auto& in : e->tx.full->inputs) {
                    utxo_.erase(in.prevout);
                    mempool_claims_.erase(in.prevout);
                    spent_confirmed_.insert(in.prevout);
                    spent_by_[in.prevout] = e->tx.id;
                }
                index_outputs(*e->tx.full, e->tx.id);
                confirmed_txs_[e->tx.id] = *e->tx.full;
            }
            mempool_bytes_ -= e->tx.size;
            mempool_.erase(e->tx.id);
        }

        blocks_.push_back(std::move(b));
        block_rows_.push_back(row);
        timeline_.push_back({t_seconds, mempool_.size(), mempool_bytes_});
        current_time_s_ = std::max(current_time_s_, t_seconds);
        return blocks_.back();
    }

    // ---- queries ----------------------------------------------------------

    std::size_t mempool_count() const { return mempool_.size(); }
    std::uint64_t mempool_bytes() const { return mempool_bytes_; }

    bool in_mempool(const txid_t& id) const { return mempool_.count(id) != 0; }
    bool confirmed(const txid_t& id) const { return confirmed_height_.count(id) != 0; }

    std::optional<std::size_t> height_of(const txid_t& id) const {
        auto it = confirmed_height_.find(id);
        if (it == confirmed_height_.end()) return std::nullopt;
        return it->second;
    }

    const transaction* find_tx(const txid_t& id) const {
        auto it = confirmed_txs_.find(id);
        return it == confirmed_txs_.end() ? nullptr : &it->second;
    }

    std::optional<txid_t> spent_by(const outpoint& op) const {
        auto it = spent_by_.find(op);
        if (it == spent_by_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<amount> utxo_value(const outpoint& op) const {
        auto it = utxo_.find(op);
        if (it == utxo_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<block>& blocks() const { return blocks_; }
    std::size_t height() const { return blocks_.size(); }
    double now() const { return current_time_s_; }

    sim_stats stats() const {
        sim_stats s;
        s.txs = records_;
        s.blocks = block_rows_;
        s.timeline = timeline_;
        s.peak_mempool_bytes = peak_mempool_bytes_;
        s.peak_mempool_count = peak_mempool_count_;
        return s;
    }

private:
    struct entry {
        sim_tx tx;
        std::vector<txid_t> parents; // unconfirmed at admission
        time_us arrival = 0;
        std::uint64_t seq = 0;
        double fee_rate = 0;
    };

    void index_outputs(const transaction& tx, const txid_t& id) {
        for (std::size_t i = 0; i < tx.outputs.size(); ++i)
            if (!tx.outputs[i].script_pubkey.is_op_return())
                utxo_[{id, static_cast<std::uint32_t>(i)}] = tx.outputs[i].value;
    }

    chain_params params_;
    std::unordered_map<txid_t, entry, txid_hasher> mempool_;
    std::unordered_map<outpoint, txid_t, outpoint_hasher> mempool_claims_;
    std::unordered_map<txid_t, std::size_t, txid_hasher> confirmed_height_;
    std::unordered_map<txid_t, transaction, txid_hasher> confirmed_txs_;
    std::unordered_map<outpoint, amount, outpoint_hasher> utxo_;
    std::unordered_set<outpoint, outpoint_hasher> spent_confirmed_;
    std::unordered_map<outpoint, txid_t, outpoint_hasher> spent_by_;
    std::vector<block> blocks_;
    std::vector<tx_record> records_;
    std::unordered_map<txid_t, std::size_t, txid_hasher> record_index_;
    std::vector<block_row> block_rows_;
    std::vector<mempool_sample> timeline_;
    std::uint64_t seq_counter_ = 0;
    std::uint64_t mempool_bytes_ = 0;
    std::uint64_t peak_mempool_bytes_ = 0;
    std::size_t peak_mempool_count_ = 0;
    double current_time_s_ = 0;
};

// ---- analysis helpers -----------------------------------------------------

struct utilization_result {
    double space = 0;
    double txn = 0;
    std::size_t first_block = 0;
    std::size_t last_block = 0;
    bool any = false;
};

// Aggregate payload utilization over the span of blocks that carry payload
// transactions (first to last, inclusive).
inline utilization_result compute_utilization(const std::vector<block_row>& rows) {
    utilization_result r;
    std::size_t first = rows.size(), last = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].payload_txs > 0) {
            first = std::min(first, i);
            last = i;
        }
    if (first == rows.size()) return r;
    std::uint64_t payload = 0, total = 0, ptxs = 0, txs = 0;
    for (std::size_t i = first; i <= last; ++i) {
        payload += rows[i].payload_bytes;
        total += rows[i].total_size;
        ptxs += rows[i].payload_txs;
        txs += rows[i].tx_count;
    }
    r.any = true;
    r.first_block = rows[first].height;
    r.last_block = rows[last].height;
    r.space = static_cast<double>(payload) / static_cast<double>(total);
    r.txn = static_cast<double>(ptxs) / static_cast<double>(txs);
    return r;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty() ? 0.0 : 1.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        double fa = static_cast<double>(i) / static_cast<double>(a.size());
        double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

} // namespace uweb::sim
