// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hash.hpp"
#include "script.hpp"
#include "standardness.hpp"
#include "tx.hpp"

namespace uweb::maxrate {

// ---- construct geometry -------------------------------------------------
//
// A data-carrying input script is four pushes:
//   PUSHDATA2(part_a) PUSHDATA2(part_b) PUSHDATA2(part_c) PUSHDATA1(redeem)
// where the 79-byte redeem script itself stores 8 more payload bytes:
//   PUSH(tail) DROP  HASH160 PUSH(h(part_c)) EQUALVERIFY
//                    HASH160 PUSH(h(part_b)) EQUALVERIFY
//                    HASH160 PUSH(h(part_a)) EQUAL
// Full input script: 3*(3+520) + (2+79) = 1,650 bytes, the relay limit.
// Payload per script: 3*520 + 8 = 1,568 bytes.

constexpr std::size_t part_size = 520;
constexpr std::size_t tail_size = 8;
constexpr std::size_t payload_per_script = 3 * part_size + tail_size; // 1,568
constexpr std::size_t full_input_script_size = 1'650;
constexpr std::size_t full_input_size = 1'693;
constexpr std::size_t spend_record_size = 23; // OP_RETURN reassembly record
constexpr std::size_t data_output_size = 32;  // P2SH output
constexpr std::size_t op_return_output_size = 8 + 1 + 2 + spend_record_size; // 34
constexpr std::size_t source_input_size = 148; // opaque-signature spend
constexpr std::size_t max_inputs_per_spending_tx = 59;
constexpr std::size_t max_data_outputs_per_funding_tx = policy::max_outputs - 1; // 2,936
constexpr std::size_t funding_outputs_per_block = 29'370; // 10 funding txs per block

constexpr std::uint64_t single_epoch_capacity =
    static_cast<std::uint64_t>(max_data_outputs_per_funding_tx) * payload_per_script; // 4,603,648

inline const bytes& spend_record_tag() {
    static const bytes tag = {'D', 'A', 'T', 'A'};
    return tag;
}

// ---- size arithmetic (shared by planner, builders and the simulator) ----

inline std::size_t input_script_size_for_payload(std::size_t q) {
    // 3 PUSHDATA2 prefixes + PUSHDATA1 prefix + redeem overhead = 82 bytes.
    return 82 + q;
}

inline std::size_t input_size_for_payload(std::size_t q) {
    std::size_t s = input_script_size_for_payload(q);
    return 36 + 4 + varint_size(s) + s;
}

inline std::size_t spending_tx_size(const std::vector<std::size_t>& chunk_payloads) {
    std::size_t n = 4 + varint_size(chunk_payloads.size()) + 1 + op_return_output_size + 4;
    for (std::size_t q : chunk_payloads) n += input_size_for_payload(q);
    return n;
}

inline std::size_t fan_out_tx_size(std::size_t total_outputs) {
    // One opaque source input plus P2SH outputs only (funding/preparing txs).
    return 4 + 1 + source_input_size + varint_size(total_outputs) +
           total_outputs * data_output_size + 4;
}

// ---- chunking ------------------------------------------------------------

struct payload_chunk {
    std::size_t index = 0;
    bytes part_a;
    bytes part_b;
    bytes part_c;
    bytes tail;

    std::size_t payload_size() const {
        return part_a.size() + part_b.size() + part_c.size() + tail.size();
    }

    bytes payload() const {
        bytes out;
        out.reserve(payload_size());
        append(out, part_a);
        append(out, part_b);
        append(out, part_c);
        append(out, tail);
        return out;
    }
};

inline std::vector<payload_chunk> chunk_payload(byte_span data) {
    if (data.empty()) throw std::invalid_argument("empty payload");
    std::vector<payload_chunk> chunks;
    chunks.reserve((data.size() + payload_per_script - 1) / payload_per_script);
    std::size_t off = 0;
    auto take = [&](std::size_t want) {
        std::size_t n = std::min(want, data.size() - off);
        bytes out(data.begin() + off, data.begin() + off + n);
        off += n;
        return out;
    };
    while (off < data.size()) {
        payload_chunk c;
        c.index = chunks.size();
        c.part_a = take(part_size);
        c.part_b = take(part_size);
        c.part_c = take(part_size);
        c.tail = take(tail_size);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

// ---- data scripts ---------------------------------------------------------

struct data_script {
    script script_sig;
    bytes redeem;
    digest160 redeem_hash{};
    std::size_t payload_size = 0;
};

inline data_script build_data_script(const payload_chunk& chunk) {
    if (chunk.part_a.size() > part_size || chunk.part_b.size() > part_size ||
        chunk.part_c.size() > part_size || chunk.tail.size() > tail_size)
        throw std::invalid_argument("chunk part exceeds its slot");

    script redeem;
    if (chunk.tail.empty())
        redeem.add(script_op::op(OP_0));
    else
        redeem.add(script_op::push_direct(chunk.tail));
    redeem.add(script_op::op(OP_DROP));
    auto lock = [&](const bytes& part, std::uint8_t final_op) {
        auto h = hash160(part);
        redeem.add(script_op::op(OP_HASH160));
        redeem.add(script_op::push_direct(byte_span(h.data(), h.size())));
        redeem.add(script_op::op(final_op));
    };
    // Hash locks appear in verification order: the last-pushed part first.
    lock(chunk.part_c, OP_EQUALVERIFY);
    lock(chunk.part_b, OP_EQUALVERIFY);
    lock(chunk.part_a, OP_EQUAL);

    data_script out;
    out.redeem = redeem.serialize();
    out.redeem_hash = hash160(out.redeem);
    out.payload_size = chunk.payload_size();
    out.script_sig.add(script_op::push_data2(chunk.part_a));
    out.script_sig.add(script_op::push_data2(chunk.part_b));
    out.script_sig.add(script_op::push_data2(chunk.part_c));
    out.script_sig.add(script_op::push_data1(out.redeem));
    return out;
}

// P2SH evaluation of a data-carrying spend: executes the input script,
// checks the redeem hash lock, then runs the redeem script against the
// pushed parts. Exactly one true element must remain.
inline bool verify_spend(const script& funding_script_pubkey, const script& script_sig) {
    auto want_hash = funding_script_pubkey.p2sh_hash();
    if (!want_hash) return false;
    if (script_sig.empty() || !script_sig.is_push_only()) return false;

    auto sig_exec = execute_script(script_sig);
    if (!sig_exec.ok || sig_exec.stack.empty()) return false;

    bytes redeem_bytes = sig_exec.stack.back();
    sig_exec.stack.pop_back();
    if (hash160(redeem_bytes) != *want_hash) return false;

    script redeem;
    try {
        redeem = script::parse(redeem_bytes);
    } catch (const parse_error&) {
        return false;
    }
    auto run = execute_script(redeem, std::move(sig_exec.stack));
    if (!run.ok || run.stack.size() != 1) return false;
    return cast_to_bool(run.stack.back());
}

// Recovers the chunk payload carried by a data input script.
inline std::optional<bytes> extract_chunk_payload(const script& script_sig) {
    if (script_sig.ops.size() != 4 || !script_sig.is_push_only()) return std::nullopt;
    script redeem;
    try {
        redeem = script::parse(script_sig.ops[3].data);
    } catch (const parse_error&) {
        return std::nullopt;
    }
    if (redeem.ops.empty() || !redeem.ops[0].is_push()) return std::nullopt;
    bytes out;
    append(out, script_sig.ops[0].data);
    append(out, script_sig.ops[1].data);
    append(out, script_sig.ops[2].data);
    append(out, redeem.ops[0].data);
    return out;
}

// ---- cost model -----------------------------------------------------------

struct cost_model {
    amount fee_rate = policy::min_fee_rate;          // base units per byte
    double epoch_seconds = 150.0;                    // w
    double upload_bandwidth = 125'000'000.0;         // B, bytes/sec (1 Gb/s)
    double chunk_payload = payload_per_script;       // p
    double funding_outputs_per_epoch = funding_outputs_per_block; // F
    double formula_tx_size = 100'000.0;              // ts
    double formula_outputs_per_tx = 2'937.0;         // f
    double formula_inputs_per_tx = 59.5;             // m
};

// ---- planning -------------------------------------------------------------

struct spending_tx_plan {
    std::size_t funding_tx = 0;
    std::size_t first_output = 0; // first funding output consumed
    std::size_t input_count = 0;
    std::size_t size = 0;
    amount fee = 0;
    std::vector<amount> input_values; // funding output values backing each input
};

struct construct_plan {
    std::uint64_t payload_size = 0;
    amount fee_rate = policy::min_fee_rate;
    std::size_t chunk_count = 0;
    std::size_t last_chunk_payload = payload_per_script;

    std::vector<std::size_t> funding_data_outputs; // per funding tx
    std::vector<std::size_t> funding_tx_sizes;
    std::vector<amount> funding_requirements; // value each funding tx must receive

    std::vector<spending_tx_plan> spending_txs;

    std::size_t preparing_tree_depth = 0;
    std::vector<std::size_t> preparing_level_counts;
    std::vector<std::uint64_t> preparing_level_bytes;

    std::size_t epochs = 0;
    std::uint64_t total_size = 0;
    amount required_source_value = 0;

    std::size_t funding_tx_count() const { return funding_data_outputs.size(); }
    std::size_t spending_tx_count() const { return spending_txs.size(); }

    std::uint64_t spending_bytes() const {
        std::uint64_t n = 0;
        for (const auto& s : spending_txs) n += s.size;
        return n;
    }

    std::uint64_t funding_bytes() const {
        return std::accumulate(funding_tx_sizes.begin(), funding_tx_sizes.end(),
                               std::uint64_t{0});
    }
};

inline std::size_t chunk_payload_at(const construct_plan& plan, std::size_t index) {
    return index + 1 == plan.chunk_count ? plan.last_chunk_payload : payload_per_script;
}

inline construct_plan plan_construct(std::uint64_t payload_size,
                                     const cost_model& model = cost_model{}) {
    if (payload_size == 0) throw std::invalid_argument("empty payload");

    construct_plan plan;
    plan.payload_size = payload_size;
    plan.fee_rate = model.fee_rate;
    plan.chunk_count = (payload_size + payload_per_script - 1) / payload_per_script;
    std::size_t rem = payload_size % payload_per_script;
    plan.last_chunk_payload = rem == 0 ? payload_per_script : rem;

    // Funding txs: up to 2,936 data outputs plus one change output each.
    std::size_t fundings =
        (plan.chunk_count + max_data_outputs_per_funding_tx - 1) / max_data_outputs_per_funding_tx;
    for (std::size_t j = 0; j < fundings; ++j) {
        std::size_t first = j * max_data_outputs_per_funding_tx;
        std::size_t count =
            std::min(max_data_outputs_per_funding_tx, plan.chunk_count - first);
        plan.funding_data_outputs.push_back(count);
        plan.funding_tx_sizes.push_back(fan_out_tx_size(count + 1));
    }

    // Spending txs: up to 59 consecutive outputs of a single funding tx.
    for (std::size_t j = 0; j < fundings; ++j) {
        std::size_t outputs = plan.funding_data_outputs[j];
        std::size_t base_chunk = j * max_data_outputs_per_funding_tx;
        for (std::size_t off = 0; off < outputs; off += max_inputs_per_spending_tx) {
            spending_tx_plan sp;
            sp.funding_tx = j;
            sp.first_output = off;
            sp.input_count = std::min(max_inputs_per_spending_tx, outputs - off);
            std::vector<std::size_t> payloads;
            std::vector<std::size_t> input_sizes;
            payloads.reserve(sp.input_count);
            for (std::size_t i = 0; i < sp.input_count; ++i) {
                std::size_t q = chunk_payload_at(plan, base_chunk + off + i);
                payloads.push_back(q);
                input_sizes.push_back(input_size_for_payload(q));
            }
            sp.size = spending_tx_size(payloads);
            sp.fee = static_cast<amount>(sp.size) * model.fee_rate;

            // Spread the fee over the funding outputs: each input carries its
            // own bytes, the tx overhead lands one unit at a time on the
            // first inputs. Values below the dust threshold are floored.
            amount assigned = 0;
            sp.input_values.resize(sp.input_count);
            for (std::size_t i = 0; i < sp.input_count; ++i) {
                sp.input_values[i] = static_cast<amount>(input_sizes[i]) * model.fee_rate;
                assigned += sp.input_values[i];
            }
            amount remaining = sp.fee - assigned;
            for (std::size_t i = 0; remaining > 0; i = (i + 1) % sp.input_count) {
                ++sp.input_values[i];
                --remaining;
            }
            for (auto& v : sp.input_values) v = std::max(v, policy::dust_threshold);
            // Outputs are zero-value, so the whole input sum is the fee. Dust
            // flooring can only push it above the relay minimum.
            sp.fee = std::accumulate(sp.input_values.begin(), sp.input_values.end(), amount{0});
            plan.spending_txs.push_back(std::move(sp));
        }
    }

    // Value each funding tx must be handed: its data outputs, its own fee and
    // a dust-floor change output.
    plan.funding_requirements.resize(fundings, 0);
    for (const auto& sp : plan.spending_txs)
        for (amount v : sp.input_values) plan.funding_requirements[sp.funding_tx] += v;
    for (std::size_t j = 0; j < fundings; ++j)
        plan.funding_requirements[j] += static_cast<amount>(plan.funding_tx_sizes[j]) *
                                            model.fee_rate +
                                        policy::dust_threshold;

    // Preparing tree: a single source output fans out to the funding txs.
    std::vector<amount> level_reqs = plan.funding_requirements;
    while (level_reqs.size() > 1) {
        std::size_t nodes =
            (level_reqs.size() + max_data_outputs_per_funding_tx - 1) /
            max_data_outputs_per_funding_tx;
        std::vector<amount> next(nodes, 0);
        std::uint64_t level_bytes = 0;
        for (std::size_t n = 0; n < nodes; ++n) {
            std::size_t first = n * max_data_outputs_per_funding_tx;
            std::size_t count =
                std::min(max_data_outputs_per_funding_tx, level_reqs.size() - first);
            std::size_t size = fan_out_tx_size(count + 1);
            level_bytes += size;
            amount req = static_cast<amount>(size) * model.fee_rate + policy::dust_threshold;
            for (std::size_t i = 0; i < count; ++i) req += level_reqs[first + i];
            next[n] = req;
        }
        plan.preparing_level_counts.insert(plan.preparing_level_counts.begin(), nodes);
        plan.preparing_level_bytes.insert(plan.preparing_level_bytes.begin(), level_bytes);
        level_reqs = std::move(next);
    }
    plan.preparing_tree_depth = plan.preparing_level_counts.size();
    plan.epochs = plan.preparing_tree_depth + 2;
    plan.required_source_value = level_reqs.front();

    plan.total_size = plan.funding_bytes() + plan.spending_bytes();
    for (std::uint64_t b : plan.preparing_level_bytes) plan.total_size += b;
    return plan;
}

// ---- estimators -----------------------------------------------------------

// Claim-1 throughput: R(N) = N / (w*E + N/B) with E = 1 + N/(p*F).
inline double estimate_throughput(std::uint64_t payload_size, const cost_model& model) {
    if (payload_size == 0) throw std::invalid_argument("empty payload");
    double n = static_cast<double>(payload_size);
    double epochs = 1.0 + n / (model.chunk_payload * model.funding_outputs_per_epoch);
    return n / (model.epoch_seconds * epochs + n / model.upload_bandwidth);
}

// Claim-2 stored-size formula S(N) and the goodput ratio N/S(N).
inline double estimate_stored_size(std::uint64_t payload_size, const cost_model& model) {
    double n = static_cast<double>(payload_size);
    return model.formula_tx_size * (n / (model.chunk_payload * model.formula_outputs_per_tx) +
                                    n / (model.chunk_payload * model.formula_inputs_per_tx));
}

inline double estimate_goodput(std::uint64_t payload_size, const cost_model& model) {
    if (payload_size == 0) throw std::invalid_argument("empty payload");
    return static_cast<double>(payload_size) / estimate_stored_size(payload_size, model);
}

// Construct cost at the model fee rate, from exact plan arithmetic.
inline amount estimate_cost(std::uint64_t payload_size, const cost_model& model) {
    construct_plan plan = plan_construct(payload_size, model);
    return static_cast<amount>(plan.total_size) * model.fee_rate;
}

// ---- building -------------------------------------------------------------

struct source_utxo {
    outpoint prevout;
    amount value = 0;
};

struct insufficient_funds : std::runtime_error {
    amount shortfall;
    explicit insufficient_funds(amount shortfall_)
        : std::runtime_error("insufficient funds: short " + std::to_string(shortfall_) +
                             " base units"),
          shortfall(shortfall_) {}
};

// Placeholder spend script for wallet-controlled outputs (real signing is
// out of scope; the chain model treats these as opaque).
inline script opaque_scriptsig() {
    script s;
    s.add(script_op::push_direct(bytes(72, 0x01)));
    s.add(script_op::push_direct(bytes(33, 0x02)));
    return s;
}

struct built_construct {
    construct_plan plan;
    std::vector<std::vector<transaction>> preparing_levels;
    std::vector<transaction> funding_txs;
    std::vector<transaction> spending_txs;
    digest256 payload_sha256{};

    std::uint64_t total_size() const {
        std::uint64_t n = 0;
        for (const auto& level : preparing_levels)
            for (const auto& t : level) n += t.serialized_size();
        for (const auto& t : funding_txs) n += t.serialized_size();
        for (const auto& t : spending_txs) n += t.serialized_size();
        return n;
    }

    double measured_goodput() const {
        return static_cast<double>(plan.payload_size) / static_cast<double>(total_size());
    }

    txid_t root_txid() const {
        if (!preparing_levels.empty()) return preparing_levels.front().front().txid();
        return funding_txs.front().txid();
    }
};

inline bytes spend_record(std::uint16_t tx_index, const digest256& payload_digest) {
    bytes rec = spend_record_tag();
    rec.push_back(0x01);
    rec.push_back(static_cast<std::uint8_t>(tx_index));
    rec.push_back(static_cast<std::uint8_t>(tx_index >> 8));
    rec.insert(rec.end(), payload_digest.begin(), payload_digest.begin() + 16);
    return rec;
}

inline transaction build_funding_tx(const std::vector<data_script>& scripts,
                                    const source_utxo& source,
                                    const std::vector<amount>& output_values,
                                    const digest160& change_address,
                                    amount fee_rate = policy::min_fee_rate) {
    if (scripts.empty()) throw std::invalid_argument("no data scripts");
    if (scripts.size() > max_data_outputs_per_funding_tx)
        throw std::invalid_argument("too many data scripts for one funding tx");
    if (scripts.size() != output_values.size())
        throw std::invalid_argument("output value per script required");

    transaction tx;
    tx.inputs.push_back({source.prevout, opaque_scriptsig(), 0xffffffff});
    amount data_total = 0;
    for (std::size_t i = 0; i < scripts.size(); ++i) {
        tx.outputs.push_back({output_values[i], script::p2sh(scripts[i].redeem_hash)});
        data_total += output_values[i];
    }
    tx.outputs.push_back({0, script::p2sh(change_address)});
    amount fee = static_cast<amount>(tx.serialized_size()) * fee_rate;
    amount change = source.value - data_total - fee;
    if (change < policy::dust_threshold)
        throw insufficient_funds(policy::dust_threshold - change);
    tx.outputs.back().value = change;
    return tx;
}

inline std::vector<transaction> build_spending_txs(const transaction& funding,
                                                   const std::vector<data_script>& scripts,
                                                   amount fee_rate = policy::min_fee_rate,
                                                   const digest256& payload_digest = {},
                                                   std::uint16_t first_tx_index = 0) {
    if (scripts.empty()) throw std::invalid_argument("no data scripts");
    if (funding.outputs.size() != scripts.size() + 1)
        throw std::invalid_argument("funding output count does not match scripts");

    txid_t funding_id = funding.txid();
    std::vector<transaction> txs;
    std::uint16_t tx_index = first_tx_index;
    for (std::size_t off = 0; off < scripts.size(); off += max_inputs_per_spending_tx) {
        std::size_t count = std::min(max_inputs_per_spending_tx, scripts.size() - off);
        transaction tx;
        for (std::size_t i = 0; i < count; ++i) {
            tx_input in;
            in.prevout = {funding_id, static_cast<std::uint32_t>(off + i)};
            in.script_sig = scripts[off + i].script_sig;
            tx.inputs.push_back(std::move(in));
        }
        bytes rec = spend_record(tx_index++, payload_digest);
        tx.outputs.push_back({0, script::op_return(rec)});
        (void)fee_rate; // outputs are zero-value: the whole input sum is the fee
        txs.push_back(std::move(tx));
    }
    return txs;
}

// Builds the preparing levels for a multi-funding construct. Each leaf
// output funds one funding tx with exactly its requirement; change outputs
// sit last in every tx.
inline std::vector<std::vector<transaction>> build_preparing_tree(
    const construct_plan& plan, const source_utxo& source, const digest160& wallet_address,
    amount fee_rate = policy::min_fee_rate) {
    if (plan.preparing_tree_depth == 0)
        throw std::invalid_argument("plan has no preparing levels");

    // Recompute requirement totals bottom-up, then materialize top-down.
    std::vector<std::vector<amount>> level_values; // child requirements per level
    std::vector<amount> reqs = plan.funding_requirements;
    while (reqs.size() > 1) {
        level_values.insert(level_values.begin(), reqs);
        std::size_t nodes =
            (reqs.size() + max_data_outputs_per_funding_tx - 1) / max_data_outputs_per_funding_tx;
        std::vector<amount> next(nodes, 0);
        for (std::size_t n = 0; n < nodes; ++n) {
            std::size_t first = n * max_data_outputs_per_funding_tx;
            std::size_t count = std::min(max_data_outputs_per_funding_tx, reqs.size() - first);
            amount req = static_cast<amount>(fan_out_tx_size(count + 1)) * fee_rate +
                         policy::dust_threshold;
            for (std::size_t i = 0; i < count; ++i) req += reqs[first + i];
            next[n] = req;
        }
        reqs = std::move(next);
    }
    if (source.value < reqs.front())
        throw insufficient_funds(reqs.front() - source.value);

    std::vector<std::vector<transaction>> levels(level_values.size());
    std::vector<source_utxo> feeds = {source};
    for (std::size_t depth = 0; depth < level_values.size(); ++depth) {
        const auto& child_reqs = level_values[depth];
        std::vector<source_utxo> next_feeds;
        for (std::size_t n = 0; n * max_data_outputs_per_funding_tx < child_reqs.size(); ++n) {
            std::size_t first = n * max_data_outputs_per_funding_tx;
            std::size_t count =
                std::min(max_data_outputs_per_funding_tx, child_reqs.size() - first);
            transaction tx;
            tx.inputs.push_back({feeds[n].prevout, opaque_scriptsig(), 0xffffffff});
            amount total = 0;
            for (std::size_t i = 0; i < count; ++i) {
                tx.outputs.push_back({child_reqs[first + i], script::p2sh(wallet_address)});
                total += child_reqs[first + i];
            }
            tx.outputs.push_back({0, script::p2sh(wallet_address)});
            amount fee = static_cast<amount>(tx.serialized_size()) * fee_rate;
            amount change = feeds[n].value - total - fee;
            if (change < policy::dust_threshold)
                throw insufficient_funds(policy::dust_threshold - change);
            tx.outputs.back().value = change;
            txid_t id = tx.txid();
            for (std::size_t i = 0; i < count; ++i)
                next_feeds.push_back({{id, static_cast<std::uint32_t>(i)}, child_reqs[first + i]});
            levels[depth].push_back(std::move(tx));
        }
        feeds = std::move(next_feeds);
    }
    return levels;
}

inline built_construct build_construct(byte_span payload, const source_utxo& source,
                                       const digest160& wallet_address,
                                       const cost_model& model = cost_model{}) {
    built_construct out;
    out.plan = plan_construct(payload.size(), model);
    out.payload_sha256 = sha256_digest(payload);

    auto chunks = chunk_payload(payload);
    std::vector<data_script> scripts;
    scripts.reserve(chunks.size());
    for (const auto& c : chunks) scripts.push_back(build_data_script(c));

    // Feed points for each funding tx: either the source itself or the
    // preparing-tree leaf outputs.
    std::vector<source_utxo> feeds;
    if (out.plan.preparing_tree_depth == 0) {
        if (source.value < out.plan.required_source_value)
            throw insufficient_funds(out.plan.required_source_value - source.value);
        feeds.push_back(source);
    } else {
        out.preparing_levels = build_preparing_tree(out.plan, source, wallet_address,
                                                    model.fee_rate);
        const auto& leaves = out.preparing_levels.back();
        std::size_t funding_index = 0;
        for (const auto& leaf : leaves) {
            txid_t id = leaf.txid();
            for (std::size_t i = 0; i + 1 < leaf.outputs.size(); ++i) {
                feeds.push_back({{id, static_cast<std::uint32_t>(i)}, leaf.outputs[i].value});
                ++funding_index;
            }
        }
        if (funding_index != out.plan.funding_tx_count())
            throw std::logic_error("preparing tree leaf mismatch");
    }

    // Funding output values follow the spending plan.
    std::vector<std::vector<amount>> funding_values(out.plan.funding_tx_count());
    for (const auto& sp : out.plan.spending_txs)
        for (amount v : sp.input_values) funding_values[sp.funding_tx].push_back(v);

    std::size_t script_off = 0;
    for (std::size_t j = 0; j < out.plan.funding_tx_count(); ++j) {
        std::size_t count = out.plan.funding_data_outputs[j];
        std::vector<data_script> slice(scripts.begin() + script_off,
                                       scripts.begin() + script_off + count);
        out.funding_txs.push_back(build_funding_tx(slice, feeds[j], funding_values[j],
                                                   wallet_address, model.fee_rate));
        auto spends = build_spending_txs(out.funding_txs.back(), slice, model.fee_rate,
                                         out.payload_sha256,
                                         static_cast<std::uint16_t>(out.spending_txs.size()));
        for (auto& s : spends) out.spending_txs.push_back(std::move(s));
        script_off += count;
    }
    return out;
}

// Reassembles the payload from spending transactions in construct order.
inline bytes reassemble_payload(const std::vector<transaction>& spending_txs) {
    bytes out;
    for (const auto& tx : spending_txs) {
        for (const auto& in : tx.inputs) {
            auto chunk = extract_chunk_payload(in.script_sig);
            if (!chunk) throw parse_error("input is not a data script");
            append(out, *chunk);
        }
    }
    return out;
}

} // namespace uweb::maxrate
