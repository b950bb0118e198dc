// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "chainsim.hpp"
#include "entries.hpp"
#include "gzipio.hpp"
#include "manifest.hpp"
#include "maxrate.hpp"
#include "sign.hpp"

namespace uweb::fs {

// ---- paths ------------------------------------------------------------------

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    return parts;
}

inline std::string join_path(const std::vector<std::string>& parts, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += "/" + parts[i];
    return out;
}

// ---- wallet -------------------------------------------------------------------

// Minimal coin tracking for the publisher: the chain model treats wallet
// spends as opaque, so an address is just a 20-byte script hash.
struct wallet {
    digest160 address{};
    std::vector<maxrate::source_utxo> utxos;

    script script_pubkey() const { return script::p2sh(address); }

    void add(const outpoint& op, amount value) { utxos.push_back({op, value}); }

    amount balance() const {
        amount total = 0;
        for (const auto& u : utxos) total += u.value;
        return total;
    }

    // Best-fit selection of a single output covering `needed`.
    maxrate::source_utxo take(amount needed) {
        std::size_t best = utxos.size();
        for (std::size_t i = 0; i < utxos.size(); ++i) {
            if (utxos[i].value < needed) continue;
            if (best == utxos.size() || utxos[i].value < utxos[best].value) best = i;
        }
        if (best == utxos.size()) throw maxrate::insufficient_funds(needed - balance());
        maxrate::source_utxo out = utxos[best];
        utxos.erase(utxos.begin() + best);
        return out;
    }
};

inline digest160 wallet_address_from_seed(byte_span seed) {
    bytes material;
    append(material, to_bytes("uweb-wallet"));
    append(material, seed);
    return hash160(material);
}

// ---- access errors ---------------------------------------------------------------

struct access_error : std::runtime_error {
    enum class kind { not_found, incomplete_content, integrity };
    kind k;
    access_error(kind k_, const std::string& what) : std::runtime_error(what), k(k_) {}
};

// ---- content index -----------------------------------------------------------------

struct file_version {
    std::string name;
    txid_t entry;
    txid_t target;
    digest256 content_sha256{};
    std::array<std::uint8_t, 16> compressed_digest{};
    std::size_t height = 0;
    bool removed = false;
};

struct dir_info {
    std::string path; // "" is the root directory
    txid_t created_by;
    outpoint tip; // the live (un-spent) chaining output
};

struct publisher_info {
    txid_t root;
    bytes certificate;
    bool certificate_valid = false;
    std::map<std::string, dir_info> directories;            // path → live chain state
    std::map<std::string, std::vector<file_version>> files; // "/dir/name" → history
};

struct pending_root {
    txid_t head; // INIT head whose certificate chain is not yet fully confirmed
};

struct content_index {
    std::vector<publisher_info> publishers;
    std::vector<pending_root> pending;
    std::vector<std::string> events;      // JSON lines, one per entry event
    std::vector<std::string> quarantined; // entry txids that failed validation
    std::size_t scan_height = 0;

    publisher_info* find_publisher(const txid_t& root) {
        for (auto& p : publishers)
            if (p.root == root) return &p;
        return nullptr;
    }

    const publisher_info* sole_publisher() const {
        return publishers.size() == 1 ? &publishers.front() : nullptr;
    }

    // Latest live version of a file, by full path, within one publisher.
    static const file_version* lookup_in(const publisher_info& p, const std::string& path) {
        auto it = p.files.find(path);
        if (it == p.files.end() || it->second.empty()) return nullptr;
        const file_version& last = it->second.back();
        return last.removed ? nullptr : &last;
    }

    const file_version* lookup(const std::string& path) const {
        const publisher_info* p = sole_publisher();
        if (!p && !publishers.empty()) p = &publishers.front();
        if (!p) return nullptr;
        return lookup_in(*p, path);
    }
};

// ---- scanning ------------------------------------------------------------------------

namespace detail {

inline std::optional<bytes> op_return_payload_of(const transaction& tx) {
    if (tx.outputs.empty() || !tx.outputs[0].script_pubkey.is_op_return()) return std::nullopt;
    return tx.outputs[0].script_pubkey.op_return_payload();
}

// Assembles a logical entry starting at its head transaction, following
// continuation outputs. Returns false while continuations are still
// unconfirmed; the caller retries on a later scan.
struct assembled_entry {
    entry_head head;
    bytes record;
    txid_t head_txid;
    std::size_t head_height = 0;
    outpoint next_tip;         // output 1 of the entry's last transaction
    bool tip_available = false;
};

inline bool assemble_entry(const sim::chain& c, const txid_t& head_id,
                           assembled_entry& out) {
    const transaction* head_tx = c.find_tx(head_id);
    if (!head_tx) return false;
    auto payload = op_return_payload_of(*head_tx);
    if (!payload) return false;
    auto head = parse_entry_head(*payload);
    if (!head) return false;

    out.head = *head;
    out.head_txid = head_id;
    out.head_height = c.height_of(head_id).value_or(0);
    out.record = head->slice;

    const transaction* cur = head_tx;
    txid_t cur_id = head_id;
    while (out.record.size() < head->record_len) {
        if (cur->outputs.size() < 2) return false;
        outpoint cont{cur_id, 1};
        auto spender = c.spent_by(cont);
        if (!spender) return false; // continuation not yet confirmed
        const transaction* next = c.find_tx(*spender);
        if (!next) return false;
        auto slice = op_return_payload_of(*next);
        if (!slice) return false;
        std::size_t want = static_cast<std::size_t>(head->record_len) - out.record.size();
        if (slice->size() > want) return false; // malformed continuation
        append(out.record, *slice);
        cur = next;
        cur_id = *spender;
    }
    if (cur->outputs.size() >= 2 && !cur->outputs[1].script_pubkey.is_op_return()) {
        out.next_tip = {cur_id, 1};
        out.tip_available = true;
    }
    return true;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
            out.push_back(c);
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x",
                          static_cast<unsigned>(static_cast<unsigned char>(c)));
            out += buf;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

inline void log_event(content_index& idx, std::size_t height, const txid_t& entry,
                      const txid_t& publisher, const std::string& kind,
                      const std::string& path, const std::string& name,
                      const std::string& target, const std::string& status) {
    std::ostringstream os;
    os << "{\"height\":" << height << ",\"entry\":\"" << entry.display() << "\""
       << ",\"publisher\":\"" << publisher.display() << "\"" << ",\"kind\":\"" << kind << "\"";
    if (!path.empty() || kind != "init") os << ",\"path\":\"" << json_escape(path) << "\"";
    if (!name.empty()) os << ",\"name\":\"" << json_escape(name) << "\"";
    if (!target.empty()) os << ",\"target\":\"" << target << "\"";
    os << ",\"status\":\"" << status << "\"}";
    idx.events.push_back(os.str());
}

// Advances one directory chain as far as confirmed entries allow.
inline void advance_directory(const sim::chain& c, content_index& idx, publisher_info& pub,
                              const std::string& path) {
    dir_info& dir = pub.directories.at(path);
    for (;;) {
        auto spender = c.spent_by(dir.tip);
        if (!spender) return;
        assembled_entry e;
        if (!assemble_entry(c, *spender, e)) return; // wait for continuations
        outpoint prev_tip = dir.tip;

        // The chain advances even past malformed or unsigned entries; they are
        // quarantined but must not freeze the directory.
        if (!e.tip_available) {
            idx.quarantined.push_back(e.head_txid.display());
            log_event(idx, e.head_height, e.head_txid, pub.root, "entry", path, "", "",
                      "malformed");
            return; // no further chaining output: directory is frozen
        }
        dir.tip = e.next_tip;

        auto quarantine = [&](const std::string& kind, const std::string& status) {
            idx.quarantined.push_back(e.head_txid.display());
            log_event(idx, e.head_height, e.head_txid, pub.root, kind, path, "", "", status);
        };

        if (e.record.size() != e.head.record_len) {
            quarantine("entry", "malformed");
            continue;
        }

        if (e.head.tag == tag_dir() && e.head.d == directive::mkdir) {
            auto rec = parse_name_record(e.record);
            if (!rec) {
                quarantine("mkdir", "malformed");
                continue;
            }
            bytes unsigned_part(e.record.begin(), e.record.end() - signature_size);
            bytes msg = entry_signing_message(prev_tip, e.head.tag, e.head.d, unsigned_part);
            if (!verify_detached(pub.certificate, msg, rec->signature)) {
                quarantine("mkdir", "bad-signature");
                continue;
            }
            const transaction* head_tx = c.find_tx(e.head_txid);
            if (head_tx->outputs.size() < 3 ||
                head_tx->outputs[2].script_pubkey.is_op_return()) {
                quarantine("mkdir", "malformed");
                continue;
            }
            std::string child = path + "/" + rec->name;
            if (!pub.directories.count(child))
                pub.directories[child] = {child, e.head_txid, {e.head_txid, 2}};
            log_event(idx, e.head_height, e.head_txid, pub.root, "mkdir", path, rec->name, "",
                      "ok");
            continue;
        }

        if (e.head.tag == tag_op() &&
            (e.head.d == directive::file || e.head.d == directive::update)) {
            auto rec = parse_file_record(e.record);
            if (!rec) {
                quarantine(to_string(e.head.d), "malformed");
                continue;
            }
            bytes unsigned_part(e.record.begin(), e.record.end() - signature_size);
            bytes msg = entry_signing_message(prev_tip, e.head.tag, e.head.d, unsigned_part);
            if (!verify_detached(pub.certificate, msg, rec->signature)) {
                quarantine(to_string(e.head.d), "bad-signature");
                continue;
            }
            file_version v;
            v.name = rec->name;
            v.entry = e.head_txid;
            v.target = rec->target;
            v.content_sha256 = rec->content_sha256;
            v.compressed_digest = rec->compressed_digest;
            v.height = e.head_height;
            pub.files[path + "/" + rec->name].push_back(v);
            log_event(idx, e.head_height, e.head_txid, pub.root, to_string(e.head.d), path,
                      rec->name, rec->target.display(), "ok");
            continue;
        }

        if (e.head.tag == tag_op() && e.head.d == directive::remove) {
            auto rec = parse_name_record(e.record);
            if (!rec) {
                quarantine("remove", "malformed");
                continue;
            }
            bytes unsigned_part(e.record.begin(), e.record.end() - signature_size);
            bytes msg = entry_signing_message(prev_tip, e.head.tag, e.head.d, unsigned_part);
            if (!verify_detached(pub.certificate, msg, rec->signature)) {
                quarantine("remove", "bad-signature");
                continue;
            }
            file_version v;
            v.name = rec->name;
            v.entry = e.head_txid;
            v.height = e.head_height;
            v.removed = true;
            pub.files[path + "/" + rec->name].push_back(v);
            log_event(idx, e.head_height, e.head_txid, pub.root, "remove", path, rec->name, "",
                      "ok");
            continue;
        }

        quarantine("entry", "malformed");
    }
}

} // namespace detail

// Builds (or incrementally extends) the content index from the local chain.
// The scan consumes only confirmed blocks; partially-written entries are
// retried from the directory's live tip on later scans.
inline content_index scan_chain(const sim::chain& c, std::size_t from_height = 0,
                                content_index base = {}) {
    content_index idx = std::move(base);
    std::size_t start = std::max(from_height, idx.scan_height);

    // Discover new INIT heads in the newly scanned range.
    for (std::size_t h = start; h < c.height(); ++h) {
        for (const auto& mined : c.blocks()[h].txs) {
            const transaction* tx = c.find_tx(mined.id);
            if (!tx) continue;
            auto payload = detail::op_return_payload_of(*tx);
            if (!payload) continue;
            auto head = parse_entry_head(*payload);
            if (!head || head->tag != tag_init() || head->d != directive::cert) continue;
            bool known = idx.find_publisher(mined.id) != nullptr;
            for (const auto& p : idx.pending) known = known || p.head == mined.id;
            if (!known) idx.pending.push_back({mined.id});
        }
    }

    // Complete pending certificates.
    std::vector<pending_root> still_pending;
    for (const auto& p : idx.pending) {
        detail::assembled_entry e;
        if (!detail::assemble_entry(c, p.head, e) || e.record.size() != e.head.record_len) {
            still_pending.push_back(p);
            continue;
        }
        publisher_info pub;
        pub.root = p.head;
        pub.certificate = e.record;
        pub.certificate_valid = certificate_consistent(pub.certificate);
        if (pub.certificate_valid && e.tip_available) {
            pub.directories[""] = {"", p.head, e.next_tip};
            detail::log_event(idx, e.head_height, p.head, p.head, "init", "", "", "", "ok");
            idx.publishers.push_back(std::move(pub));
        } else {
            idx.quarantined.push_back(p.head.display());
            detail::log_event(idx, e.head_height, p.head, p.head, "init", "", "", "",
                              "bad-certificate");
        }
    }
    idx.pending = std::move(still_pending);

    // Advance every live directory chain. New directories created while
    // advancing are themselves advanced until nothing moves.
    for (auto& pub : idx.publishers) {
        bool progress = true;
        while (progress) {
            progress = false;
            std::vector<std::string> paths;
            paths.reserve(pub.directories.size());
            for (const auto& [path, info] : pub.directories) paths.push_back(path);
            for (const auto& path : paths) {
                outpoint before = pub.directories.at(path).tip;
                detail::advance_directory(c, idx, pub, path);
                if (!(pub.directories.at(path).tip == before)) progress = true;
            }
        }
    }

    idx.scan_height = c.height();
    return idx;
}

// ---- content access ----------------------------------------------------------------------

// Depth-first reconstruction of a construct's compressed payload from the
// chain alone: follow each non-change output to its confirmed spender;
// fan-out children recurse, data-carrying spenders contribute their input
// payloads in funding-output order.
inline bytes collect_construct_payload(const sim::chain& c, const txid_t& root) {
    bytes out;
    std::unordered_set<txid_t, txid_hasher> consumed;

    auto is_data_spender = [&](const transaction& tx) {
        auto payload = detail::op_return_payload_of(tx);
        if (!payload || payload->size() < maxrate::spend_record_tag().size()) return false;
        return std::equal(maxrate::spend_record_tag().begin(),
                          maxrate::spend_record_tag().end(), payload->begin());
    };

    auto walk = [&](auto&& self, const txid_t& id) -> void {
        const transaction* tx = c.find_tx(id);
        if (!tx)
            throw access_error(access_error::kind::incomplete_content,
                               "missing constituent transaction " + id.display());
        if (tx->outputs.size() < 2)
            throw access_error(access_error::kind::incomplete_content,
                               "transaction " + id.display() + " is not part of a construct");
        for (std::size_t i = 0; i + 1 < tx->outputs.size(); ++i) {
            outpoint op{id, static_cast<std::uint32_t>(i)};
            auto spender = c.spent_by(op);
            if (!spender)
                throw access_error(access_error::kind::incomplete_content,
                                   "unspent data output " + id.display() + ":" +
                                       std::to_string(i));
            const transaction* stx = c.find_tx(*spender);
            if (!stx)
                throw access_error(access_error::kind::incomplete_content,
                                   "missing spender " + spender->display());
            if (is_data_spender(*stx)) {
                if (!consumed.insert(*spender).second) continue;
                for (const auto& in : stx->inputs) {
                    auto chunk = maxrate::extract_chunk_payload(in.script_sig);
                    if (!chunk)
                        throw access_error(access_error::kind::integrity,
                                           "input of " + spender->display() +
                                               " is not a data script");
                    append(out, *chunk);
                }
            } else {
                self(self, *spender);
            }
        }
    };
    walk(walk, root);
    return out;
}

// Access by construct root: rebuild, check the spend-record digest, inflate.
inline bytes access_by_txid(const sim::chain& c, const txid_t& root) {
    bytes compressed = collect_construct_payload(c, root);
    try {
        return gzip_decompress(compressed);
    } catch (const gzip_error& e) {
        throw access_error(access_error::kind::integrity,
                           std::string("payload does not inflate: ") + e.what());
    }
}

// Access by path: resolve through the index, then verify both stored digests.
inline bytes access(const sim::chain& c, const content_index& idx, const std::string& path) {
    const file_version* v = idx.lookup(path);
    if (!v) throw access_error(access_error::kind::not_found, "no such file: " + path);
    bytes compressed = collect_construct_payload(c, v->target);
    auto comp_digest = sha256_digest(compressed);
    if (!std::equal(v->compressed_digest.begin(), v->compressed_digest.end(),
                    comp_digest.begin()))
        throw access_error(access_error::kind::integrity,
                           "compressed digest mismatch for " + path);
    bytes data;
    try {
        data = gzip_decompress(compressed);
    } catch (const gzip_error& e) {
        throw access_error(access_error::kind::integrity,
                           std::string("payload does not inflate: ") + e.what());
    }
    if (sha256_digest(data) != v->content_sha256)
        throw access_error(access_error::kind::integrity, "content digest mismatch for " + path);
    return data;
}

// ---- publisher client ----------------------------------------------------------------------

struct client_config {
    amount fee_rate = policy::min_fee_rate;
    std::size_t certificate_size = 1024;
    amount chain_output_value = policy::dust_threshold;
    std::size_t confirm_timeout_epochs = 64;
};

// Drives the full write path against a local simulated chain: identity
// setup, directory creation, store/update/remove. The client mines the chain
// forward itself (one command at a time on a desk-scale chain).
class client {
public:
    client(sim::chain& c, identity id, wallet w, client_config cfg = {})
        : chain_(c), id_(std::move(id)), wallet_(std::move(w)), cfg_(cfg) {
        epoch_ = static_cast<std::size_t>(chain_.now() / chain_.params().epoch_seconds);
    }

    const identity& who() const { return id_; }
    const wallet& funds() const { return wallet_; }
    wallet& funds() { return wallet_; }
    std::optional<txid_t> root() const { return root_; }
    const std::optional<construct_manifest>& last_manifest() const { return last_manifest_; }

    // Adopt chain state discovered by a scan (e.g. after reloading).
    void adopt(const content_index& idx) {
        if (idx.publishers.empty()) return;
        for (const auto& pub : idx.publishers) {
            if (!certificate_consistent(pub.certificate) ||
                pub.certificate != id_.certificate)
                continue;
            root_ = pub.root;
            tips_.clear();
            for (const auto& [path, info] : pub.directories) tips_[path] = info.tip;
            return;
        }
    }

    // Creates the root directory entry chain carrying the certificate.
    txid_t setup() {
        if (root_) return *root_;
        auto payloads = split_entry_payloads(tag_init(), directive::cert, id_.certificate);
        auto txs = build_entry_chain(std::nullopt, payloads, false);
        submit_and_confirm(txs, sim::tx_class::uweb);
        root_ = txs.front().txid();
        tips_[""] = {txs.back().txid(), 1};
        return *root_;
    }

    // Stores a file: gzip, build the max-rate construct, confirm it stage by
    // stage, then append the FILE entry to the directory chain.
    txid_t store(const std::string& dir_path, const std::string& name, byte_span data,
                 bool create_dirs = true) {
        return store_op(dir_path, name, data, directive::file, create_dirs);
    }

    txid_t update(const std::string& dir_path, const std::string& name, byte_span data) {
        return store_op(dir_path, name, data, directive::update, false);
    }

    void remove(const std::string& dir_path, const std::string& name) {
        require_setup();
        std::string dir = ensure_directories(dir_path, false);
        bytes record = encode_name_record_unsigned(name);
        append_entry(dir, tag_op(), directive::remove, record, false);
    }

    void mkdir(const std::string& dir_path) {
        require_setup();
        ensure_directories(dir_path, true);
    }

    // Advances the local chain one epoch.
    void mine() {
        chain_.mine(static_cast<double>(++epoch_) * chain_.params().epoch_seconds);
    }

    double now() const {
        return static_cast<double>(epoch_) * chain_.params().epoch_seconds + 1.0;
    }

private:
    void require_setup() {
        if (!root_) throw std::logic_error("publisher not initialized; run setup first");
    }

    // Walks/creates the directory chain for every component of the path.
    std::string ensure_directories(const std::string& dir_path, bool create) {
        require_setup();
        auto parts = split_path(dir_path);
        std::string cur;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            std::string next = join_path(parts, i + 1);
            if (!tips_.count(next)) {
                if (!create)
                    throw std::invalid_argument("unknown directory: " + next);
                bytes record = encode_name_record_unsigned(parts[i]);
                append_entry(cur, tag_dir(), directive::mkdir, record, true);
            }
            cur = next;
        }
        return cur;
    }

    txid_t store_op(const std::string& dir_path, const std::string& name, byte_span data,
                    directive d, bool create_dirs) {
        require_setup();
        if (data.empty()) throw std::invalid_argument("empty file");
        std::string dir = ensure_directories(dir_path, create_dirs);

        bytes compressed = gzip_compress(data);
        maxrate::cost_model model;
        model.fee_rate = cfg_.fee_rate;
        auto plan = maxrate::plan_construct(compressed.size(), model);
        auto source = wallet_.take(plan.required_source_value);
        auto built = maxrate::build_construct(compressed, source, wallet_.address, model);
        last_manifest_ = make_manifest(built);

        // Closed-loop staging: each level waits for its parents' block.
        for (const auto& level : built.preparing_levels)
            submit_and_confirm(level, sim::tx_class::maxrate);
        submit_and_confirm(built.funding_txs, sim::tx_class::maxrate);
        submit_and_confirm(built.spending_txs, sim::tx_class::maxrate);

        // Reclaim change outputs (always the last output of fan-out txs).
        for (const auto& level : built.preparing_levels)
            for (const auto& tx : level)
                wallet_.add({tx.txid(), static_cast<std::uint32_t>(tx.outputs.size() - 1)},
                            tx.outputs.back().value);
        for (const auto& tx : built.funding_txs)
            wallet_.add({tx.txid(), static_cast<std::uint32_t>(tx.outputs.size() - 1)},
                        tx.outputs.back().value);

        txid_t target = built.root_txid();
        file_record rec;
        rec.target = target;
        rec.content_sha256 = sha256_digest(data);
        auto cd = sha256_digest(compressed);
        std::copy(cd.begin(), cd.begin() + 16, rec.compressed_digest.begin());
        rec.name = name;
        bytes record = encode_file_record_unsigned(rec);
        append_entry(dir, tag_op(), d, record, false);
        return target;
    }

    // Builds and confirms one logical entry on a directory chain.
    void append_entry(const std::string& dir, const bytes& tag, directive d,
                      const bytes& record_unsigned, bool with_new_chain) {
        outpoint prev_tip = tips_.at(dir);
        bytes msg = entry_signing_message(prev_tip, tag, d, record_unsigned);
        bytes record = record_unsigned;
        append(record, sign_detached(id_.secret, msg));
        auto payloads = split_entry_payloads(tag, d, record);
        auto txs = build_entry_chain(prev_tip, payloads, with_new_chain);
        submit_and_confirm(txs, sim::tx_class::uweb);
        tips_[dir] = {txs.back().txid(), 1};
        if (with_new_chain) {
            auto rec = parse_name_record(record);
            tips_[dir + "/" + rec->name] = {txs.front().txid(), 2};
        }
    }

    // One transaction per payload; each spends its predecessor's output 1 and
    // one wallet output for fees. The head of a new directory additionally
    // carries the child chain's first tip at output 2.
    std::vector<transaction> build_entry_chain(std::optional<outpoint> prev_tip,
                                               const std::vector<bytes>& payloads,
                                               bool with_new_chain) {
        std::vector<transaction> txs;
        std::optional<outpoint> chain_in = prev_tip;
        amount chain_in_value = prev_tip ? cfg_.chain_output_value : 0;
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            auto fuel = wallet_.take(10 * policy::dust_threshold + 2'000);
            transaction tx;
            if (chain_in) tx.inputs.push_back({*chain_in, maxrate::opaque_scriptsig(), 0xffffffff});
            tx.inputs.push_back({fuel.prevout, maxrate::opaque_scriptsig(), 0xffffffff});
            tx.outputs.push_back({0, script::op_return(payloads[i])});
            tx.outputs.push_back({cfg_.chain_output_value, wallet_.script_pubkey()});
            if (with_new_chain && i == 0)
                tx.outputs.push_back({cfg_.chain_output_value, wallet_.script_pubkey()});
            tx.outputs.push_back({0, wallet_.script_pubkey()});
            amount fee = static_cast<amount>(tx.serialized_size()) * cfg_.fee_rate;
            amount in_total = chain_in_value + fuel.value;
            amount out_total = 0;
            for (const auto& o : tx.outputs) out_total += o.value;
            amount change = in_total - out_total - fee;
            if (change < policy::dust_threshold)
                throw maxrate::insufficient_funds(policy::dust_threshold - change);
            tx.outputs.back().value = change;
            txid_t id = tx.txid();
            wallet_.add({id, static_cast<std::uint32_t>(tx.outputs.size() - 1)}, change);
            chain_in = outpoint{id, 1};
            chain_in_value = cfg_.chain_output_value;
            txs.push_back(std::move(tx));
        }
        return txs;
    }

    void submit_and_confirm(const std::vector<transaction>& txs, sim::tx_class klass) {
        if (txs.empty()) return;
        for (const auto& tx : txs) {
            auto res = chain_.submit(tx, klass, now());
            if (!res.accepted)
                throw std::runtime_error("transaction rejected: " + res.reason + " (" +
                                         tx.txid().display() + ")");
        }
        for (std::size_t i = 0; i < cfg_.confirm_timeout_epochs; ++i) {
            bool all = true;
            for (const auto& tx : txs)
                if (!chain_.confirmed(tx.txid())) {
                    all = false;
                    break;
                }
            if (all) return;
            mine();
        }
        throw std::runtime_error("transactions failed to confirm within the timeout");
    }

    sim::chain& chain_;
    identity id_;
    wallet wallet_;
    client_config cfg_;
    std::map<std::string, outpoint> tips_;
    std::optional<txid_t> root_;
    std::optional<construct_manifest> last_manifest_;
    std::size_t epoch_ = 0;
};

} // namespace uweb::fs
