// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chainsim.hpp"
#include "maxrate.hpp"

namespace uweb::attack {

// ---- victim model -----------------------------------------------------------

// A confirmed funding transaction and an in-flight spending transaction whose
// inputs all reference it. The attacker observes the spending transaction in
// the open relay network and tries to profit from mutating it.
struct victim_ctx {
    transaction funding;
    transaction victim;
};

inline chain_context funding_context(const transaction& funding) {
    chain_context ctx;
    txid_t fid = funding.txid();
    ctx.input_value = [funding, fid](const outpoint& op) -> std::optional<amount> {
        if (op.txid == fid && op.index < funding.outputs.size())
            return funding.outputs[op.index].value;
        return std::nullopt;
    };
    return ctx;
}

// The payload a reader would extract from one input: the full chunk for
// hash-locked scripts, otherwise the concatenated part pushes. Used to decide
// whether a mutation changed the stored data.
inline std::optional<bytes> input_parts(const script& script_sig) {
    if (auto full = maxrate::extract_chunk_payload(script_sig)) return full;
    if (script_sig.ops.size() < 2) return std::nullopt;
    bytes out;
    for (std::size_t i = 0; i + 1 < script_sig.ops.size(); ++i) {
        if (!script_sig.ops[i].is_push()) return std::nullopt;
        append(out, script_sig.ops[i].data);
    }
    return out;
}

// True when every input's redeem script contains a signature check, i.e. the
// classic ownership guard the data scripts deliberately drop.
inline bool signature_guarded(const transaction& victim) {
    for (const auto& in : victim.inputs) {
        if (in.script_sig.ops.empty() || !in.script_sig.ops.back().is_push()) return false;
        script redeem;
        try {
            redeem = script::parse(in.script_sig.ops.back().data);
        } catch (const parse_error&) {
            return false;
        }
        if (!redeem.contains(OP_CHECKSIG) && !redeem.contains(OP_CHECKSIGVERIFY) &&
            !redeem.contains(OP_CHECKMULTISIG) && !redeem.contains(OP_CHECKMULTISIGVERIFY))
            return false;
    }
    return !victim.inputs.empty();
}

// ---- outcomes -----------------------------------------------------------------

struct attack_outcome {
    std::string kind;
    bool applicable = true;       // false when a signature guard blocks the attack
    bool forged_standard = false; // the mutation survives relay policy
    bool forged_valid_spend = false; // the funding scripts still accept the inputs
    bool forged_mined_first = false; // outcome of the relay race, when run
    bool data_corrupted = false;     // stored payload would change if mined
    amount stolen_value = 0;
    std::string blocking_rule; // first relay rule that rejected the forgery
    std::string reason;
    std::optional<transaction> forged;
};

// ---- output modification ------------------------------------------------------

// The attacker rewrites the outputs of the observed spending transaction to
// claim its value, leaving the inputs untouched. Against max-rate spends every
// variant dies in relay policy: the whole input value is fee, so any output
// the attacker could add either falls below the dust floor or starves the fee.
inline attack_outcome output_modification_attack(const victim_ctx& ctx,
                                                 const digest160& attacker_address) {
    attack_outcome out;
    out.kind = "output-modification";
    if (signature_guarded(ctx.victim)) {
        out.applicable = false;
        out.reason = "inputs are signature-guarded; mutated outputs would invalidate them";
        return out;
    }

    chain_context values = funding_context(ctx.funding);
    amount in_total = 0;
    for (const auto& in : ctx.victim.inputs) {
        auto v = values.input_value(in.prevout);
        if (!v) throw std::invalid_argument("victim input does not spend the given funding tx");
        in_total += *v;
    }

    struct candidate {
        std::string name;
        transaction tx;
        amount stolen = 0;
    };
    std::vector<candidate> candidates;

    // Redirect every value-bearing output to the attacker.
    {
        candidate c{"redirect", ctx.victim, 0};
        for (auto& o : c.tx.outputs) {
            if (o.script_pubkey.is_op_return() || o.value == 0) continue;
            o.script_pubkey = script::p2pkh(attacker_address);
            c.stolen += o.value;
        }
        if (c.stolen > 0) candidates.push_back(std::move(c));
    }
    // Convert a data marker output into an attacker output funded by fee slack.
    for (std::size_t i = 0; i < ctx.victim.outputs.size(); ++i) {
        if (!ctx.victim.outputs[i].script_pubkey.is_op_return()) continue;
        candidate c{"capture", ctx.victim, 0};
        c.tx.outputs[i].script_pubkey = script::p2pkh(attacker_address);
        amount fee_needed =
            static_cast<amount>(c.tx.serialized_size()) * policy::min_fee_rate;
        amount other = 0;
        for (std::size_t j = 0; j < c.tx.outputs.size(); ++j)
            if (j != i) other += c.tx.outputs[j].value;
        // A rational thief claims at least the dust floor; anything less is
        // unrelayable anyway, and this makes the binding constraint visible.
        c.tx.outputs[i].value =
            std::max<amount>(in_total - other - fee_needed, policy::dust_threshold);
        c.stolen = c.tx.outputs[i].value;
        candidates.push_back(std::move(c));
        break;
    }
    // Append a fresh attacker output funded by fee slack.
    {
        candidate c{"append", ctx.victim, 0};
        c.tx.outputs.push_back({0, script::p2pkh(attacker_address)});
        amount fee_needed =
            static_cast<amount>(c.tx.serialized_size()) * policy::min_fee_rate;
        amount other = 0;
        for (std::size_t j = 0; j + 1 < c.tx.outputs.size(); ++j) other += c.tx.outputs[j].value;
        c.tx.outputs.back().value =
            std::max<amount>(in_total - other - fee_needed, policy::dust_threshold);
        c.stolen = c.tx.outputs.back().value;
        candidates.push_back(std::move(c));
    }

    std::string failures;
    for (auto& c : candidates) {
        auto report = check_standard(c.tx, values);
        if (report.passed) {
            out.forged_standard = true;
            out.forged_valid_spend = true; // inputs untouched
            out.stolen_value = c.stolen;
            out.forged = std::move(c.tx);
            out.reason = "outputs rewritten via '" + c.name + "' variant";
            return out;
        }
        if (!report.violations.empty() && out.blocking_rule.empty())
            out.blocking_rule = report.violations.front();
        if (!failures.empty()) failures += ", ";
        failures += c.name + ":" + (report.violations.empty() ? "?" : report.violations.front());
    }
    out.reason = "every output mutation violates relay policy (" + failures + ")";
    return out;
}

// ---- input modification ----------------------------------------------------------

struct mutation {
    std::size_t input = 0;
    std::size_t offset = 0;       // byte offset into the serialized input script
    std::uint8_t xor_mask = 0x01; // must be non-zero
};

// The attacker flips bits inside an input script, attempting to corrupt the
// stored data while keeping the transaction alive. The hash locks make the
// two goals exclusive: a surviving script re-hashes to a different redeem or
// part digest and the spend stops validating.
inline attack_outcome input_modification_attack(const victim_ctx& ctx, const mutation& m) {
    attack_outcome out;
    out.kind = "input-modification";
    if (m.input >= ctx.victim.inputs.size())
        throw std::invalid_argument("mutation references a missing input");

    bytes raw = ctx.victim.inputs[m.input].script_sig.serialize();
    if (raw.empty()) throw std::invalid_argument("victim input has an empty script");
    if (m.xor_mask == 0) throw std::invalid_argument("mutation mask must be non-zero");
    raw[m.offset % raw.size()] ^= m.xor_mask;

    transaction forged = ctx.victim;
    script mutated;
    try {
        mutated = script::parse(raw);
    } catch (const parse_error&) {
        out.reason = "mutated script no longer parses";
        return out;
    }
    forged.inputs[m.input].script_sig = std::move(mutated);

    chain_context values = funding_context(ctx.funding);
    auto report = check_standard(forged, values);
    out.forged_standard = report.passed;
    if (!report.passed && !report.violations.empty())
        out.blocking_rule = report.violations.front();

    const script& spk =
        ctx.funding.outputs[ctx.victim.inputs[m.input].prevout.index].script_pubkey;
    out.forged_valid_spend = maxrate::verify_spend(spk, forged.inputs[m.input].script_sig);

    auto before = input_parts(ctx.victim.inputs[m.input].script_sig);
    auto after = input_parts(forged.inputs[m.input].script_sig);
    bool payload_changed = before && after ? *before != *after : true;
    out.data_corrupted = out.forged_standard && out.forged_valid_spend && payload_changed;
    out.forged = std::move(forged);
    if (out.data_corrupted)
        out.reason = "payload mutated and the spend still validates";
    else if (!out.forged_valid_spend)
        out.reason = "funding script rejects the mutated input";
    else if (!out.forged_standard)
        out.reason = report.violations.empty() ? "non-standard" : report.violations.front();
    else
        out.reason = "mutation left the payload unchanged";
    return out;
}

struct fuzz_report {
    std::size_t attempts = 0;
    std::size_t parse_survivors = 0;   // mutated script still parses
    std::size_t standard_forgeries = 0; // still passes relay policy
    std::size_t valid_spends = 0;       // funding script still accepts
    std::size_t corruptions = 0;        // data changed AND tx fully alive
};

inline fuzz_report fuzz_input_modifications(const victim_ctx& ctx, std::size_t attempts,
                                            std::uint64_t seed) {
    fuzz_report rep;
    rep.attempts = attempts;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < attempts; ++i) {
        mutation m;
        m.input = rng() % ctx.victim.inputs.size();
        std::size_t len = ctx.victim.inputs[m.input].script_sig.serialize().size();
        m.offset = rng() % len;
        m.xor_mask = static_cast<std::uint8_t>(1 + rng() % 255);
        auto out = input_modification_attack(ctx, m);
        if (out.forged) ++rep.parse_survivors;
        if (out.forged_standard) ++rep.standard_forgeries;
        if (out.forged_valid_spend) ++rep.valid_spends;
        if (out.data_corrupted) ++rep.corruptions;
    }
    return rep;
}

// ---- relay race ----------------------------------------------------------------

struct race_result {
    bool attacker_won = false;
    bool attacker_accepted = false;
    std::string attacker_reject_reason;
    txid_t mined;
};

// First-seen adjudication on a fresh single-node chain: the funding output is
// confirmed, then victim and forgery arrive `head_start` seconds apart
// (positive head start = the attacker is heard first).
inline race_result race(const victim_ctx& ctx, const transaction& forged, double head_start) {
    race_result res;
    sim::chain c;
    c.adopt_confirmed(ctx.funding, sim::tx_class::attack);

    double victim_t = 20.0;
    double attacker_t = victim_t - head_start;
    auto submit_victim = [&] { return c.submit(ctx.victim, sim::tx_class::attack, victim_t); };
    auto submit_attacker = [&] { return c.submit(forged, sim::tx_class::attack, attacker_t); };

    if (attacker_t < victim_t) {
        auto a = submit_attacker();
        res.attacker_accepted = a.accepted;
        res.attacker_reject_reason = a.reason;
        submit_victim();
    } else {
        submit_victim();
        auto a = submit_attacker();
        res.attacker_accepted = a.accepted;
        res.attacker_reject_reason = a.reason;
    }
    c.mine(c.params().epoch_seconds);
    res.attacker_won = c.confirmed(forged.txid());
    if (res.attacker_won)
        res.mined = forged.txid();
    else if (c.confirmed(ctx.victim.txid()))
        res.mined = ctx.victim.txid();
    return res;
}

// ---- baseline (vulnerable) construct ------------------------------------------------

// What writing data WITHOUT the hash-lock template looks like: the redeem
// script drops the parts unchecked and the spending transaction keeps its
// slack in a valued change output. Both attack families succeed against it.
struct baseline_build {
    transaction funding;
    transaction spending;
    bytes payload;
};

inline script baseline_redeem() {
    script s;
    for (int i = 0; i < 4; ++i) s.ops.push_back(script_op::op(OP_DROP));
    s.ops.push_back(script_op::push_direct(bytes{0x01}));
    return s;
}

inline baseline_build build_baseline(byte_span payload, const maxrate::source_utxo& source,
                                     const digest160& change_address, amount fee_rate = 1) {
    baseline_build b;
    b.payload.assign(payload.begin(), payload.end());
    auto chunks = maxrate::chunk_payload(payload);

    script redeem = baseline_redeem();
    bytes redeem_bytes = redeem.serialize();
    digest160 redeem_hash = hash160(redeem_bytes);

    // Unchecked input scripts carrying the parts plus the shared redeem.
    std::vector<script> sigs;
    for (const auto& ch : chunks) {
        script sig;
        sig.ops.push_back(script_op::push_data2(ch.part_a));
        sig.ops.push_back(script_op::push_data2(ch.part_b));
        sig.ops.push_back(script_op::push_data2(ch.part_c));
        sig.ops.push_back(script_op::push_data2(ch.tail));
        sig.ops.push_back(script_op::push_data1(redeem_bytes));
        sigs.push_back(std::move(sig));
    }

    // Funding: one P2SH output per input plus generous change.
    b.funding.inputs.push_back({source.prevout, maxrate::opaque_scriptsig(), 0xffffffff});
    std::vector<amount> input_values;
    for (const auto& sig : sigs) {
        bytes raw = sig.serialize();
        amount sz = static_cast<amount>(40 + varint_size(raw.size()) + raw.size());
        amount v = sz * fee_rate + 2 * policy::dust_threshold; // deliberate slack
        input_values.push_back(v);
        b.funding.outputs.push_back({v, script::p2sh(redeem_hash)});
    }
    b.funding.outputs.push_back({0, script::p2sh(change_address)});
    amount fund_fee = static_cast<amount>(b.funding.serialized_size()) * fee_rate;
    amount spent = fund_fee;
    for (amount v : input_values) spent += v;
    if (source.value < spent + policy::dust_threshold)
        throw maxrate::insufficient_funds(spent + policy::dust_threshold - source.value);
    b.funding.outputs.back().value = source.value - spent;

    // Spending: data inputs, marker output, valued change output (the flaw).
    txid_t fid = b.funding.txid();
    for (std::size_t i = 0; i < sigs.size(); ++i)
        b.spending.inputs.push_back(
            {{fid, static_cast<std::uint32_t>(i)}, sigs[i], 0xffffffff});
    auto digest = sha256_digest(payload);
    b.spending.outputs.push_back({0, script::op_return(maxrate::spend_record(0, digest))});
    b.spending.outputs.push_back({0, script::p2pkh(change_address)});
    amount in_total = 0;
    for (amount v : input_values) in_total += v;
    amount spend_fee = static_cast<amount>(b.spending.serialized_size()) * fee_rate;
    b.spending.outputs.back().value = in_total - spend_fee;
    return b;
}

// Convenience: a hardened max-rate victim built from the same payload, for
// side-by-side comparison in the harness.
inline victim_ctx maxrate_victim(byte_span payload, const maxrate::source_utxo& source,
                                 const digest160& wallet_address) {
    maxrate::cost_model model;
    auto built = maxrate::build_construct(payload, source, wallet_address, model);
    if (built.funding_txs.size() != 1 || built.spending_txs.size() != 1)
        throw std::invalid_argument("payload too large for a single-funding victim");
    return {built.funding_txs.front(), built.spending_txs.front()};
}

} // namespace uweb::attack
