// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxrate.hpp"

namespace uweb {

// A construct manifest lists every transaction of a built construct in
// submission order, with its role, preparing-tree level and scheduled epoch.
// It is the interchange format between the builder, the simulator's workload
// loader, the attack harness and the CLI.

struct manifest_entry {
    std::string txid;
    std::string role; // "preparing" | "funding" | "spending"
    std::size_t level = 0;
    std::size_t epoch = 0;
    transaction tx;
};

struct construct_manifest {
    std::uint64_t payload_size = 0;
    std::string payload_sha256;
    amount fee_rate = policy::min_fee_rate;
    std::size_t epochs = 0;
    std::vector<manifest_entry> entries;

    std::vector<transaction> spending_transactions() const {
        std::vector<transaction> out;
        for (const auto& e : entries)
            if (e.role == "spending") out.push_back(e.tx);
        return out;
    }
};

inline construct_manifest make_manifest(const maxrate::built_construct& built) {
    construct_manifest m;
    m.payload_size = built.plan.payload_size;
    m.payload_sha256 = hex_encode(byte_span(built.payload_sha256.data(), 32));
    m.fee_rate = built.plan.fee_rate;
    m.epochs = built.plan.epochs;
    std::size_t depth = built.preparing_levels.size();
    for (std::size_t level = 0; level < depth; ++level)
        for (const auto& tx : built.preparing_levels[level])
            m.entries.push_back({tx.txid().display(), "preparing", level, level, tx});
    for (const auto& tx : built.funding_txs)
        m.entries.push_back({tx.txid().display(), "funding", depth, depth, tx});
    for (const auto& tx : built.spending_txs)
        m.entries.push_back({tx.txid().display(), "spending", depth + 1, depth + 1, tx});
    return m;
}

inline nlohmann::json manifest_to_json(const construct_manifest& m) {
    nlohmann::json txs = nlohmann::json::array();
    for (const auto& e : m.entries) {
        txs.push_back({{"txid", e.txid},
                       {"role", e.role},
                       {"level", e.level},
                       {"epoch", e.epoch},
                       {"hex", hex_encode(e.tx.serialize())}});
    }
    return nlohmann::json{{"format", "uweb-construct-manifest-v1"},
                          {"payload_size", m.payload_size},
                          {"payload_sha256", m.payload_sha256},
                          {"fee_rate", m.fee_rate},
                          {"epochs", m.epochs},
                          {"transactions", std::move(txs)}};
}

inline construct_manifest manifest_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "uweb-construct-manifest-v1")
        throw std::runtime_error("not a construct manifest");
    construct_manifest m;
    m.payload_size = j.at("payload_size").get<std::uint64_t>();
    m.payload_sha256 = j.at("payload_sha256").get<std::string>();
    m.fee_rate = j.at("fee_rate").get<amount>();
    m.epochs = j.at("epochs").get<std::size_t>();
    for (const auto& t : j.at("transactions")) {
        manifest_entry e;
        e.txid = t.at("txid").get<std::string>();
        e.role = t.at("role").get<std::string>();
        e.level = t.at("level").get<std::size_t>();
        e.epoch = t.at("epoch").get<std::size_t>();
        auto raw = hex_decode(t.at("hex").get<std::string>());
        if (!raw) throw std::runtime_error("bad transaction hex in manifest");
        e.tx = transaction::deserialize(*raw);
        if (e.tx.txid().display() != e.txid)
            throw std::runtime_error("manifest txid does not match transaction bytes");
        m.entries.push_back(std::move(e));
    }
    return m;
}

inline void save_manifest(const construct_manifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << manifest_to_json(m).dump(1) << '\n';
}

inline construct_manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return manifest_from_json(j);
}

} // namespace uweb
