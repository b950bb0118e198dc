// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <uweb/attack.hpp>
#include <uweb/manifest.hpp>
#include <uweb/uwebfs.hpp>
#include <uweb/workload.hpp>

namespace {

namespace fsys = std::filesystem;
using nlohmann::json;
using namespace uweb;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2; // validation failure
constexpr int exit_chain = 3; // simulation / chain error

// ---- configuration ----------------------------------------------------------

struct cli_config {
    std::string state_dir = "uweb-state";
    amount fee_rate = policy::min_fee_rate;
    double epoch_seconds = 150.0;
    double bandwidth = 125'000'000.0; // bytes/second, for estimates
    std::uint64_t seed = 1;
    unsigned scheme_id = fs::demo_scheme_id;
    double units_per_mltc = static_cast<double>(MILLI_COIN);
};

void overlay_config_file(cli_config& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    json j;
    in >> j;
    cfg.state_dir = j.value("state_dir", cfg.state_dir);
    cfg.fee_rate = j.value("fee_rate", cfg.fee_rate);
    cfg.epoch_seconds = j.value("epoch_seconds", cfg.epoch_seconds);
    cfg.bandwidth = j.value("bandwidth", cfg.bandwidth);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.scheme_id = j.value("scheme_id", cfg.scheme_id);
    cfg.units_per_mltc = j.value("units_per_mltc", cfg.units_per_mltc);
    if (cfg.fee_rate <= 0 || cfg.epoch_seconds <= 0 || cfg.bandwidth <= 0 ||
        cfg.units_per_mltc <= 0)
        throw std::invalid_argument("config values must be positive");
}

void require_known_scheme(const cli_config& cfg) {
    if (cfg.scheme_id != fs::demo_scheme_id)
        throw std::invalid_argument("unknown signature scheme id " +
                                    std::to_string(cfg.scheme_id));
}

maxrate::cost_model model_from(const cli_config& cfg) {
    maxrate::cost_model m;
    m.fee_rate = cfg.fee_rate;
    m.epoch_seconds = cfg.epoch_seconds;
    m.upload_bandwidth = cfg.bandwidth;
    return m;
}

// ---- small utilities -----------------------------------------------------------

bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path);
    bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::string& path, byte_span data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string fmt_mltc(amount v, const cli_config& cfg) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3)
       << static_cast<double>(v) / cfg.units_per_mltc;
    return os.str();
}

std::string fmt3(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

bool looks_like_txid(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    double rank = p / 100.0 * static_cast<double>(v.size());
    auto idx = static_cast<std::size_t>(std::ceil(rank));
    if (idx > 0) --idx;
    if (idx >= v.size()) idx = v.size() - 1;
    return v[idx];
}

// ---- state directory lock --------------------------------------------------------

// One command at a time per state directory.
class state_lock {
public:
    explicit state_lock(const fsys::path& dir) : path_(dir / "LOCK") {
        int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw std::runtime_error("state directory is locked (remove " + path_.string() +
                                     " if no other command is running)");
        ::close(fd);
    }
    ~state_lock() { ::unlink(path_.c_str()); }
    state_lock(const state_lock&) = delete;
    state_lock& operator=(const state_lock&) = delete;

private:
    fsys::path path_;
};

// ---- chain / wallet persistence ------------------------------------------------------

sim::tx_class class_from_string(const std::string& s) {
    if (s == "financial") return sim::tx_class::financial;
    if (s == "maxrate") return sim::tx_class::maxrate;
    if (s == "uweb") return sim::tx_class::uweb;
    if (s == "attack") return sim::tx_class::attack;
    if (s == "genesis") return sim::tx_class::genesis;
    throw std::invalid_argument("unknown transaction class: " + s);
}

void save_chain(const sim::chain& c, const fsys::path& path) {
    json blocks = json::array();
    for (const auto& b : c.blocks()) {
        json txs = json::array();
        for (const auto& m : b.txs) {
            const transaction* tx = c.find_tx(m.id);
            if (!tx) throw std::runtime_error("chain holds a transaction without bytes");
            txs.push_back({{"hex", hex_encode(tx->serialize())}, {"class", to_string(m.klass)}});
        }
        blocks.push_back({{"time", b.time_s}, {"txs", std::move(txs)}});
    }
    json j{{"format", "uweb-chain-v1"},
           {"epoch_seconds", c.params().epoch_seconds},
           {"blocks", std::move(blocks)}};
    write_text(path.string(), j.dump());
}

sim::chain load_chain(const fsys::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("state not initialized (missing " + path.string() +
                                         "); run init first");
    json j;
    in >> j;
    if (j.value("format", "") != "uweb-chain-v1")
        throw std::invalid_argument("unrecognized chain state format");
    sim::chain c(sim::chain_params{j.value("epoch_seconds", 150.0)});
    for (const auto& jb : j.at("blocks")) {
        double t = jb.value("time", 0.0);
        std::vector<std::pair<transaction, sim::tx_class>> txs;
        for (const auto& jt : jb.at("txs")) {
            auto raw = hex_decode(jt.at("hex").get<std::string>());
            if (!raw) throw std::invalid_argument("corrupt chain state: bad hex");
            txs.emplace_back(transaction::deserialize(*raw),
                             class_from_string(jt.at("class").get<std::string>()));
        }
        if (txs.size() == 1 && txs.front().second == sim::tx_class::genesis) {
            c.adopt_confirmed(txs.front().first, sim::tx_class::genesis);
            continue;
        }
        for (auto& [tx, klass] : txs) {
            auto res = c.submit(tx, klass, t - 1.0);
            if (!res.accepted)
                throw std::runtime_error("corrupt chain state: replay rejected a stored "
                                         "transaction (" +
                                         res.reason + ")");
        }
        c.mine(t);
    }
    return c;
}

void save_wallet(const fs::identity& id, const fs::wallet& w, const fsys::path& path) {
    json utxos = json::array();
    for (const auto& u : w.utxos)
        utxos.push_back({{"txid", u.prevout.txid.display()},
                         {"index", u.prevout.index},
                         {"value", u.value}});
    json j{{"format", "uweb-wallet-v1"},
           {"secret", hex_encode(id.secret)},
           {"certificate", hex_encode(id.certificate)},
           {"address", hex_encode(byte_span(w.address.data(), w.address.size()))},
           {"utxos", std::move(utxos)}};
    write_text(path.string(), j.dump());
}

struct publisher_state {
    fs::identity id;
    fs::wallet wallet;
};

publisher_state load_wallet(const fsys::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("state not initialized (missing " + path.string() +
                                         "); run init first");
    json j;
    in >> j;
    if (j.value("format", "") != "uweb-wallet-v1")
        throw std::invalid_argument("unrecognized wallet state format");
    publisher_state st;
    auto secret = hex_decode(j.at("secret").get<std::string>());
    auto cert = hex_decode(j.at("certificate").get<std::string>());
    auto addr = hex_decode(j.at("address").get<std::string>());
    if (!secret || !cert || !addr || addr->size() != st.wallet.address.size())
        throw std::invalid_argument("corrupt wallet state");
    st.id.secret = *secret;
    st.id.certificate = *cert;
    std::copy(addr->begin(), addr->end(), st.wallet.address.begin());
    for (const auto& ju : j.at("utxos"))
        st.wallet.add({txid_t::from_display(ju.at("txid").get<std::string>()),
                       ju.at("index").get<std::uint32_t>()},
                      ju.at("value").get<amount>());
    return st;
}

// ---- plan ------------------------------------------------------------------------------

int cmd_plan(const cli_config& cfg, const std::string& file, bool as_json) {
    bytes payload = read_file(file);
    if (payload.empty()) throw std::invalid_argument("empty payload: nothing to plan");

    auto model = model_from(cfg);
    auto plan = maxrate::plan_construct(payload.size(), model);
    double throughput = maxrate::estimate_throughput(payload.size(), model);
    double goodput = maxrate::estimate_goodput(payload.size(), model);
    amount cost = maxrate::estimate_cost(payload.size(), model);

    if (as_json) {
        json j{{"payload_bytes", plan.payload_size},
               {"chunks", plan.chunk_count},
               {"preparing_txs", plan.preparing_level_counts},
               {"funding_txs", plan.funding_tx_count()},
               {"funding_outputs", plan.funding_data_outputs},
               {"spending_txs", plan.spending_tx_count()},
               {"epochs", plan.epochs},
               {"total_bytes", plan.total_size},
               {"required_source_value", plan.required_source_value},
               {"fee_rate", plan.fee_rate},
               {"cost",
                {{"base_units", cost}, {"mltc", static_cast<double>(cost) / cfg.units_per_mltc}}},
               {"estimates",
                {{"throughput_bytes_per_s", throughput},
                 {"goodput", goodput},
                 {"plan_goodput", static_cast<double>(plan.payload_size) /
                                      static_cast<double>(plan.total_size)}}}};
        std::cout << j.dump(2) << "\n";
        return exit_ok;
    }

    std::size_t preparing = 0;
    for (std::size_t n : plan.preparing_level_counts) preparing += n;
    std::size_t data_outputs = 0;
    for (std::size_t n : plan.funding_data_outputs) data_outputs += n;
    std::cout << "payload:            " << plan.payload_size << " bytes ("
              << plan.chunk_count << " chunks)\n";
    if (preparing) std::cout << "preparing txs:      " << preparing << "\n";
    std::cout << "funding txs:        " << plan.funding_tx_count() << " (" << data_outputs
              << " data outputs)\n"
              << "spending txs:       " << plan.spending_tx_count() << "\n"
              << "epochs:             " << plan.epochs << "\n"
              << "bytes on chain:     " << plan.total_size << "\n"
              << "cost:               " << cost << " base units (" << fmt_mltc(cost, cfg)
              << " mLTC)\n"
              << "throughput:         " << fmt3(throughput / 1000.0) << " KB/s sustained\n"
              << "goodput:            " << fmt3(goodput) << " (formula), "
              << fmt3(static_cast<double>(plan.payload_size) /
                      static_cast<double>(plan.total_size))
              << " (this construct)\n";
    return exit_ok;
}

// ---- init ---------------------------------------------------------------------------------

int cmd_init(const cli_config& cfg, std::size_t grant_outputs, amount grant_value,
             std::size_t cert_size, bool as_json) {
    require_known_scheme(cfg);
    fsys::path dir(cfg.state_dir);
    fsys::create_directories(dir);
    if (fsys::exists(dir / "chain.json"))
        throw std::invalid_argument("state directory already initialized: " + cfg.state_dir);
    state_lock lock(dir);

    sim::chain chain(sim::chain_params{cfg.epoch_seconds});
    std::string material = "uweb-identity-" + std::to_string(cfg.seed);
    fs::identity id = fs::make_demo_identity(to_bytes(material), cert_size);
    fs::wallet wallet;
    wallet.address = fs::wallet_address_from_seed(to_bytes(material));
    auto outs = chain.grant(grant_outputs, grant_value, wallet.script_pubkey());
    for (const auto& op : outs) wallet.add(op, grant_value);

    fs::client_config ccfg;
    ccfg.fee_rate = cfg.fee_rate;
    ccfg.certificate_size = cert_size;
    fs::client client(chain, id, wallet, ccfg);
    txid_t root = client.setup();

    save_chain(chain, dir / "chain.json");
    save_wallet(client.who(), client.funds(), dir / "wallet.json");

    if (as_json) {
        json j{{"root", root.display()},
               {"height", chain.height()},
               {"balance", client.funds().balance()},
               {"state_dir", cfg.state_dir}};
        std::cout << j.dump(2) << "\n";
        return exit_ok;
    }
    std::cout << "publisher initialized\n"
              << "root:      " << root.display() << "\n"
              << "height:    " << chain.height() << " blocks\n"
              << "balance:   " << client.funds().balance() << " base units ("
              << fmt_mltc(client.funds().balance(), cfg) << " mLTC)\n"
              << "state dir: " << cfg.state_dir << "\n";
    return exit_ok;
}

// ---- store ------------------------------------------------------------------------------

void split_remote_path(const std::string& remote, std::string& dir, std::string& name) {
    if (remote.empty() || remote.front() != '/')
        throw std::invalid_argument("remote path must start with '/'");
    auto parts = fs::split_path(remote);
    if (parts.empty()) throw std::invalid_argument("remote path names no file");
    name = parts.back();
    parts.pop_back();
    dir = fs::join_path(parts, parts.size());
}

int cmd_store(const cli_config& cfg, const std::string& local, const std::string& remote,
              bool create_dirs, const std::string& manifest_out, bool as_json) {
    require_known_scheme(cfg);
    bytes data = read_file(local);
    if (data.empty()) throw std::invalid_argument("refusing to store an empty file");
    std::string dir_path, name;
    split_remote_path(remote, dir_path, name);

    fsys::path dir(cfg.state_dir);
    state_lock lock(dir);
    sim::chain chain = load_chain(dir / "chain.json");
    publisher_state st = load_wallet(dir / "wallet.json");

    fs::content_index index = fs::scan_chain(chain);
    fs::client_config ccfg;
    ccfg.fee_rate = cfg.fee_rate;
    fs::client client(chain, st.id, st.wallet, ccfg);
    client.adopt(index);
    if (!client.root())
        throw std::invalid_argument("no publisher root on this chain; run init first");

    std::size_t height_before = chain.height();
    amount balance_before = client.funds().balance();
    txid_t target = client.store(dir_path, name, data, create_dirs);
    amount spent = balance_before - client.funds().balance();
    std::size_t mined = 0;
    for (std::size_t h = height_before; h < chain.height(); ++h)
        mined += chain.blocks()[h].txs.size();

    fsys::create_directories(dir / "constructs");
    fsys::path manifest_path = dir / "constructs" / (target.display() + ".json");
    if (client.last_manifest()) {
        save_manifest(*client.last_manifest(), manifest_path.string());
        if (!manifest_out.empty()) save_manifest(*client.last_manifest(), manifest_out);
    }

    save_chain(chain, dir / "chain.json");
    save_wallet(client.who(), client.funds(), dir / "wallet.json");

    if (as_json) {
        json j{{"target", target.display()},
               {"path", remote},
               {"bytes", data.size()},
               {"transactions", mined},
               {"epochs", chain.height() - height_before},
               {"cost", {{"base_units", spent},
                         {"mltc", static_cast<double>(spent) / cfg.units_per_mltc}}},
               {"manifest", manifest_path.string()}};
        std::cout << j.dump(2) << "\n";
        return exit_ok;
    }
    std::cout << "stored " << remote << " (" << data.size() << " bytes)\n"
              << "content root: " << target.display() << "\n"
              << "transactions: " << mined << " mined over "
              << (chain.height() - height_before) << " epochs\n"
              << "cost:         " << spent << " base units (" << fmt_mltc(spent, cfg)
              << " mLTC)\n"
              << "manifest:     " << manifest_path.string() << "\n";
    return exit_ok;
}

// ---- access ---------------------------------------------------------------------------

int cmd_access(const cli_config& cfg, const std::string& target, const std::string& out_path,
               bool as_json) {
    fsys::path dir(cfg.state_dir);
    state_lock lock(dir);
    sim::chain chain = load_chain(dir / "chain.json");

    bytes data;
    if (looks_like_txid(target)) {
        data = fs::access_by_txid(chain, txid_t::from_display(target));
    } else {
        fs::content_index index = fs::scan_chain(chain);
        data = fs::access(chain, index, target);
    }
    auto digest = sha256_digest(data);
    std::string digest_hex = hex_encode(byte_span(digest.data(), digest.size()));
    if (!out_path.empty()) write_file(out_path, data);

    if (as_json) {
        json j{{"target", target}, {"bytes", data.size()}, {"sha256", digest_hex}};
        if (!out_path.empty()) j["out"] = out_path;
        std::cout << j.dump(2) << "\n";
        return exit_ok;
    }
    if (!out_path.empty())
        std::cout << "wrote " << data.size() << " bytes to " << out_path << "\n";
    else
        std::cout << "retrieved " << data.size() << " bytes\n";
    std::cout << "sha256: " << digest_hex << "\n";
    return exit_ok;
}

// ---- scan -----------------------------------------------------------------------------

int cmd_scan(const cli_config& cfg, bool as_json) {
    fsys::path dir(cfg.state_dir);
    state_lock lock(dir);
    sim::chain chain = load_chain(dir / "chain.json");
    fs::content_index index = fs::scan_chain(chain);

    std::string events;
    for (const auto& line : index.events) events += line + "\n";
    write_text((dir / "events.jsonl").string(), events);

    if (as_json) {
        json pubs = json::array();
        for (const auto& p : index.publishers) {
            json dirs = json::array();
            for (const auto& [path, info] : p.directories)
                dirs.push_back(path.empty() ? "/" : path);
            json files = json::object();
            for (const auto& [path, versions] : p.files) {
                const auto* live = fs::content_index::lookup_in(p, path);
                files[path] = {{"versions", versions.size()},
                               {"live", live != nullptr},
                               {"target", live ? live->target.display() : ""}};
            }
            pubs.push_back({{"root", p.root.display()},
                            {"certificate_valid", p.certificate_valid},
                            {"directories", std::move(dirs)},
                            {"files", std::move(files)}});
        }
        json j{{"height", chain.height()},
               {"publishers", std::move(pubs)},
               {"events", index.events.size()},
               {"quarantined", index.quarantined}};
        std::cout << j.dump(2) << "\n";
        return exit_ok;
    }

    std::cout << "height:      " << chain.height() << " blocks\n"
              << "publishers:  " << index.publishers.size() << "\n";
    for (const auto& p : index.publishers) {
        std::size_t live = 0;
        for (const auto& [path, versions] : p.files)
            if (fs::content_index::lookup_in(p, path)) ++live;
        std::cout << "  root " << p.root.display()
                  << (p.certificate_valid ? "" : " (INVALID certificate)") << "\n"
                  << "    directories: " << p.directories.size() << ", files: " << live << " live / "
                  << p.files.size() << " paths\n";
    }
    std::cout << "events:      " << index.events.size() << " (written to "
              << (dir / "events.jsonl").string() << ")\n"
              << "quarantined: " << index.quarantined.size() << "\n";
    return exit_ok;
}

// ---- simulate --------------------------------------------------------------------------

json class_summary(const sim::sim_stats& stats, sim::tx_class klass) {
    auto delays = stats.delays(klass);
    std::size_t submitted = 0, rejected = 0;
    for (const auto& r : stats.txs)
        if (r.klass == klass) {
            ++submitted;
            if (r.rejected) ++rejected;
        }
    return json{{"class", to_string(klass)},
                {"submitted", submitted},
                {"confirmed", delays.size()},
                {"rejected", rejected},
                {"mean_delay_s", sim::sim_stats::mean(delays)},
                {"p50_delay_s", percentile(delays, 50)},
                {"p90_delay_s", percentile(delays, 90)},
                {"p99_delay_s", percentile(delays, 99)},
                {"max_delay_s", sim::sim_stats::max(delays)}};
}

int cmd_simulate(const cli_config& cfg, const std::string& workload_file,
                 const std::string& preset, std::size_t writers, double multiplier,
                 std::string out_dir, bool seed_overridden, bool epoch_overridden,
                 bool as_json) {
    sim::workload_spec w;
    if (!workload_file.empty()) {
        w = sim::load_workload(workload_file);
    } else if (preset == "writer-scaling") {
        w = sim::writer_scaling_scenario(writers, cfg.seed);
    } else if (preset == "financial-multiplier") {
        w = sim::financial_multiplier_scenario(multiplier, cfg.seed);
    } else if (preset == "utilization") {
        w = sim::utilization_scenario(cfg.seed);
    } else if (preset.empty()) {
        throw std::invalid_argument("provide a workload file or --preset");
    } else {
        throw std::invalid_argument("unknown preset: " + preset);
    }
    if (seed_overridden) w.seed = cfg.seed;
    if (epoch_overridden) w.epoch_seconds = cfg.epoch_seconds;

    auto result = sim::run_workload(w);

    if (out_dir.empty()) out_dir = "uweb-sim-out";
    fsys::create_directories(out_dir);
    fsys::path txs_csv = fsys::path(out_dir) / "transactions.csv";
    fsys::path blocks_csv = fsys::path(out_dir) / "blocks.csv";
    sim::write_csv_file(txs_csv.string(),
                        [&](std::ostream& os) { sim::write_tx_csv(result.stats, os); });
    sim::write_csv_file(blocks_csv.string(),
                        [&](std::ostream& os) { sim::write_block_csv(result.stats, os); });

    json summary{{"seed", w.seed},
                 {"epochs", result.epochs},
                 {"blocks", result.stats.blocks.size()},
                 {"rejected", result.rejected},
                 {"peak_mempool_bytes", result.stats.peak_mempool_bytes},
                 {"peak_mempool_txs", result.stats.peak_mempool_count},
                 {"classes",
                  {class_summary(result.stats, sim::tx_class::financial),
                   class_summary(result.stats, sim::tx_class::maxrate)}},
                 {"utilization",
                  {{"space", result.utilization.space},
                   {"txn", result.utilization.txn},
                   {"window_blocks", result.utilization.any
                                         ? result.utilization.last_block -
                                               result.utilization.first_block + 1
                                         : 0}}},
                 {"outputs", {txs_csv.string(), blocks_csv.string()}}};
    if (as_json) {
        std::cout << summary.dump(2) << "\n";
        return exit_ok;
    }

    std::cout << "epochs:       " << result.epochs << " (" << result.stats.blocks.size()
              << " blocks)\n"
              << "peak mempool: " << result.stats.peak_mempool_bytes << " bytes ("
              << fmt3(static_cast<double>(result.stats.peak_mempool_bytes) /
                      (1024.0 * 1024.0 * 1024.0))
              << " GiB), " << result.stats.peak_mempool_count << " txs\n"
              << "rejected:     " << result.rejected << "\n";
    for (auto klass : {sim::tx_class::financial, sim::tx_class::maxrate}) {
        auto s = class_summary(result.stats, klass);
        if (s["submitted"].get<std::size_t>() == 0) continue;
        std::cout << to_string(klass) << ": " << s["confirmed"].get<std::size_t>() << "/"
                  << s["submitted"].get<std::size_t>() << " confirmed, delay mean "
                  << fmt3(s["mean_delay_s"].get<double>()) << "s, p50 "
                  << fmt3(s["p50_delay_s"].get<double>()) << "s, p90 "
                  << fmt3(s["p90_delay_s"].get<double>()) << "s, p99 "
                  << fmt3(s["p99_delay_s"].get<double>()) << "s, max "
                  << fmt3(s["max_delay_s"].get<double>()) << "s\n";
    }
    if (result.utilization.any)
        std::cout << "utilization:  space " << fmt3(result.utilization.space) << ", txn "
                  << fmt3(result.utilization.txn) << " (blocks "
                  << result.utilization.first_block << ".." << result.utilization.last_block
                  << ")\n";
    std::cout << "wrote " << txs_csv.string() << " and " << blocks_csv.string() << "\n";
    return exit_ok;
}

// ---- attack ----------------------------------------------------------------------------

attack::victim_ctx victim_from_manifest(const std::string& path) {
    construct_manifest m = load_manifest(path);
    const transaction* spending = nullptr;
    for (const auto& e : m.entries)
        if (e.role == "spending") {
            spending = &e.tx;
            break;
        }
    if (!spending) throw std::invalid_argument("manifest has no spending transaction");
    std::string funding_id = spending->inputs.front().prevout.txid.display();
    for (const auto& e : m.entries)
        if (e.txid == funding_id) return {e.tx, *spending};
    throw std::invalid_argument("manifest does not contain the funding transaction");
}

attack::victim_ctx demo_victim(const cli_config& cfg, bool baseline, const bytes& payload) {
    maxrate::source_utxo source{{sim::synth_txid("attack-src", cfg.seed, 0), 0},
                                1'000 * COIN};
    digest160 owner = hash160(to_bytes("uweb-demo-victim"));
    if (baseline) {
        auto b = attack::build_baseline(payload, source, owner, cfg.fee_rate);
        return {b.funding, b.spending};
    }
    return attack::maxrate_victim(payload, source, owner);
}

json outcome_json(const attack::attack_outcome& o) {
    json j{{"kind", o.kind},
           {"applicable", o.applicable},
           {"forged_standard", o.forged_standard},
           {"forged_valid_spend", o.forged_valid_spend},
           {"data_corrupted", o.data_corrupted},
           {"stolen_value", o.stolen_value},
           {"reason", o.reason}};
    if (!o.blocking_rule.empty()) j["blocking_rule"] = o.blocking_rule;
    if (o.forged) j["forged_txid"] = o.forged->txid().display();
    return j;
}

int cmd_attack(const cli_config& cfg, const std::string& kind, const std::string& manifest_path,
               bool baseline, std::optional<double> head_start, std::size_t fuzz_n,
               bool as_json) {
    if (kind != "output-mod" && kind != "input-mod")
        throw std::invalid_argument("unknown attack kind: " + kind +
                                    " (expected output-mod or input-mod)");
    if (baseline && !manifest_path.empty())
        throw std::invalid_argument("--baseline and --manifest are mutually exclusive");

    bytes payload;
    for (std::size_t i = 0; i < 2'500; ++i)
        payload.push_back(static_cast<std::uint8_t>((i * 31 + 7) & 0xff));
    attack::victim_ctx ctx = manifest_path.empty() ? demo_victim(cfg, baseline, payload)
                                                   : victim_from_manifest(manifest_path);
    digest160 attacker = hash160(to_bytes("uweb-attacker"));

    json j{{"victim",
            {{"funding", ctx.funding.txid().display()},
             {"spending", ctx.victim.txid().display()},
             {"baseline", baseline}}}};
    std::ostringstream human;

    if (kind == "output-mod") {
        auto out = attack::output_modification_attack(ctx, attacker);
        j["outcome"] = outcome_json(out);
        if (!out.applicable) {
            human << "not applicable: " << out.reason << "\n";
        } else if (!out.forged_standard) {
            human << "forgery nonstandard: " << out.blocking_rule << "\n"
                  << out.reason << "\n";
        } else {
            human << "forgery standard; diverts " << out.stolen_value << " base units\n";
            if (head_start) {
                auto r = attack::race(ctx, *out.forged, *head_start);
                j["race"] = {{"head_start_s", *head_start},
                             {"attacker_won", r.attacker_won},
                             {"attacker_accepted", r.attacker_accepted},
                             {"mined", r.mined.display()}};
                human << "race with " << *head_start << "s head start: attacker "
                      << (r.attacker_won ? "mined first" : "lost") << "\n";
            }
        }
    } else {
        if (fuzz_n > 0) {
            auto rep = attack::fuzz_input_modifications(ctx, fuzz_n, cfg.seed);
            j["fuzz"] = {{"attempts", rep.attempts},
                         {"parse_survivors", rep.parse_survivors},
                         {"standard_forgeries", rep.standard_forgeries},
                         {"valid_spends", rep.valid_spends},
                         {"corruptions", rep.corruptions}};
            human << rep.attempts << " mutations: " << rep.standard_forgeries
                  << " relayable, " << rep.valid_spends << " still spend, " << rep.corruptions
                  << " corrupt the data\n"
                  << (rep.corruptions == 0 ? "construct is immune: corruption failed\n"
                                           : "corruption succeeded\n");
        } else {
            attack::mutation m;
            m.offset = 10; // inside the first data part
            auto out = attack::input_modification_attack(ctx, m);
            j["outcome"] = outcome_json(out);
            human << (out.data_corrupted ? "corruption succeeded" : "corruption failed") << ": "
                  << out.reason << "\n";
            if (out.data_corrupted && head_start && out.forged) {
                auto r = attack::race(ctx, *out.forged, *head_start);
                j["race"] = {{"head_start_s", *head_start},
                             {"attacker_won", r.attacker_won},
                             {"attacker_accepted", r.attacker_accepted},
                             {"mined", r.mined.display()}};
                human << "race with " << *head_start << "s head start: attacker "
                      << (r.attacker_won ? "mined first" : "lost") << "\n";
            }
        }
    }

    if (as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << human.str();
    return exit_ok;
}

// ---- error mapping -------------------------------------------------------------------------

template <typename F> int guarded(F&& f) {
    try {
        return f();
    } catch (const fs::access_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.k == fs::access_error::kind::not_found ? exit_usage : exit_chain;
    } catch (const maxrate::insufficient_funds& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const json::exception& e) {
        std::cerr << "error: invalid JSON: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_chain;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"uweb: on-chain data storage toolkit (local simulated chain)"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    cli_config flags; // raw flag values; merged onto the config file below
    bool as_json = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--state-dir", flags.state_dir, "state directory")->capture_default_str();
    app.add_option("--seed", flags.seed, "deterministic seed")->capture_default_str();
    app.add_option("--fee-rate", flags.fee_rate, "fee rate, base units per byte")
        ->capture_default_str();
    app.add_option("--epoch-seconds", flags.epoch_seconds, "confirmation epoch length")
        ->capture_default_str();
    app.add_option("--bandwidth", flags.bandwidth, "upload bandwidth for estimates, bytes/s")
        ->capture_default_str();
    app.add_flag("--json", as_json, "machine-readable output");

    // plan
    auto* plan = app.add_subcommand("plan", "plan a construct for a payload file");
    std::string plan_file;
    plan->add_option("file", plan_file, "payload file")->required();

    // init
    auto* init = app.add_subcommand("init", "create a publisher on a fresh local chain");
    std::size_t grant_outputs = 64;
    amount grant_value = COIN;
    std::size_t cert_size = 1024;
    init->add_option("--grant-outputs", grant_outputs, "granted wallet outputs")
        ->capture_default_str();
    init->add_option("--grant-value", grant_value, "value of each granted output")
        ->capture_default_str();
    init->add_option("--cert-size", cert_size, "certificate size in bytes")
        ->capture_default_str();

    // store
    auto* store = app.add_subcommand("store", "store a local file at a directory path");
    std::string store_local, store_remote, manifest_out;
    bool no_create_dirs = false;
    store->add_option("file", store_local, "local file")->required();
    store->add_option("path", store_remote, "remote path, e.g. /news/today")->required();
    store->add_flag("--no-create-dirs", no_create_dirs, "fail on missing directories");
    store->add_option("--manifest-out", manifest_out, "also write the construct manifest here");

    // access
    auto* access = app.add_subcommand("access", "retrieve a file by path or content root txid");
    std::string access_target, access_out;
    access->add_option("target", access_target, "path or 64-hex txid")->required();
    access->add_option("-o,--out", access_out, "write content to this file");

    // scan
    auto* scan = app.add_subcommand("scan", "rebuild the content index from the chain");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a workload on the chain simulator");
    std::string workload_file, preset, out_dir;
    std::size_t sim_writers = 359;
    double sim_multiplier = 10.0;
    simulate->add_option("workload", workload_file, "workload JSON file");
    simulate->add_option("--preset", preset,
                         "writer-scaling | financial-multiplier | utilization");
    simulate->add_option("--writers", sim_writers, "writers for writer-scaling")
        ->capture_default_str();
    simulate->add_option("--multiplier", sim_multiplier, "financial traffic multiplier")
        ->capture_default_str();
    simulate->add_option("--out-dir", out_dir, "CSV output directory");

    // attack
    auto* attack_cmd = app.add_subcommand("attack", "run an attack demo against a construct");
    std::string attack_kind, attack_manifest;
    bool attack_baseline = false;
    double head_start_value = 0;
    std::size_t fuzz_n = 0;
    attack_cmd->add_option("kind", attack_kind, "output-mod | input-mod")->required();
    attack_cmd->add_option("--manifest", attack_manifest, "construct manifest of the victim");
    attack_cmd->add_flag("--baseline", attack_baseline,
                         "attack a deliberately unhardened construct");
    auto* hs_opt = attack_cmd->add_option("--head-start", head_start_value,
                                          "relay race head start in seconds");
    attack_cmd->add_option("--fuzz", fuzz_n, "number of random input mutations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    cli_config cfg;
    return guarded([&]() -> int {
        if (!config_path.empty()) overlay_config_file(cfg, config_path);
        if (app.count("--state-dir")) cfg.state_dir = flags.state_dir;
        if (app.count("--seed")) cfg.seed = flags.seed;
        if (app.count("--fee-rate")) cfg.fee_rate = flags.fee_rate;
        if (app.count("--epoch-seconds")) cfg.epoch_seconds = flags.epoch_seconds;
        if (app.count("--bandwidth")) cfg.bandwidth = flags.bandwidth;
        if (cfg.fee_rate <= 0 || cfg.epoch_seconds <= 0 || cfg.bandwidth <= 0)
            throw std::invalid_argument("fee rate, epoch length, and bandwidth must be positive");

        if (plan->parsed()) return cmd_plan(cfg, plan_file, as_json);
        if (init->parsed())
            return cmd_init(cfg, grant_outputs, grant_value, cert_size, as_json);
        if (store->parsed())
            return cmd_store(cfg, store_local, store_remote, !no_create_dirs, manifest_out,
                             as_json);
        if (access->parsed()) return cmd_access(cfg, access_target, access_out, as_json);
        if (scan->parsed()) return cmd_scan(cfg, as_json);
        if (simulate->parsed())
            return cmd_simulate(cfg, workload_file, preset, sim_writers, sim_multiplier,
                                out_dir, app.count("--seed") > 0,
                                app.count("--epoch-seconds") > 0, as_json);
        if (attack_cmd->parsed()) {
            std::optional<double> hs;
            if (hs_opt->count()) hs = head_start_value;
            return cmd_attack(cfg, attack_kind, attack_manifest, attack_baseline, hs, fuzz_n,
                              as_json);
        }
        return exit_usage;
    });
}
