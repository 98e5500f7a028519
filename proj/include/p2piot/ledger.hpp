#pragma once

#include <map>
#include <set>

#include "p2piot/block.hpp"
#include "p2piot/payload.hpp"

// Full nodes, mempool admission and the commit rule. Consensus is modeled,
// not mined: either a single authority appends, or a one-round quorum vote
// commits when at least 2f+1 distinct clean approvals arrive. A failed
// round leaves transactions pending and rotates the leader.

namespace p2piot {

struct LedgerMode {
    bool quorum = false;
    uint32_t n = 1;  // total nodes
    uint32_t f = 0;  // tolerated faults; quorum requires n >= 3f+1

    static LedgerMode single_authority() { return {false, 1, 0}; }
    static LedgerMode quorum_bft(uint32_t n, uint32_t f) { return {true, n, f}; }

    bool valid() const { return quorum ? n >= 3 * f + 1 : true; }
    uint32_t votes_needed() const { return 2 * f + 1; }
};

struct LedgerConfig {
    LedgerMode mode = LedgerMode::single_authority();
    uint64_t fee = 0;  // flat per transaction, minor units; 0 = permissioned
    std::string currency_label = "TOK";
    Key32 authority{};  // genesis authority: may mint, runs single-authority commits
};

struct Receipt {
    Key32 tx_id{};
    uint64_t fee_charged = 0;
};

enum class SubmitCode { RejectedInvalidSignature, RejectedReplay };

struct SubmitError {
    SubmitCode code;
    std::string message;
};

struct LedgerNode {
    PeerId node_id;
    LedgerConfig config;
    std::vector<Block> chain;
    std::vector<Transaction> mempool;  // arrival order

    // Committed-state caches for admission checks.
    std::map<Key32, uint64_t> committed_nonce;
    std::set<Key32> committed_tx_ids;

    explicit LedgerNode(PeerId id = {}, LedgerConfig cfg = {})
        : node_id(std::move(id)), config(std::move(cfg)) {
        chain.push_back(make_genesis());
    }

    const Block& tip() const { return chain.back(); }
    uint64_t height() const { return tip().height; }

    bool in_mempool(const Key32& tx_id) const {
        for (const auto& tx : mempool)
            if (tx.tx_id == tx_id) return true;
        return false;
    }

    void append_committed(const Block& b) {
        chain.push_back(b);
        for (const auto& tx : b.txs) {
            committed_tx_ids.insert(tx.tx_id);
            committed_nonce[tx.sender.key] = tx.nonce;
        }
        // Purge committed and now-stale entries.
        std::vector<Transaction> keep;
        for (auto& tx : mempool) {
            if (committed_tx_ids.count(tx.tx_id)) continue;
            auto it = committed_nonce.find(tx.sender.key);
            if (it != committed_nonce.end() && tx.nonce <= it->second) continue;
            keep.push_back(std::move(tx));
        }
        mempool = std::move(keep);
    }
};

// Valid transactions enter the mempool exactly once; resubmitting a known
// tx id returns the same receipt without a second entry.
inline Expected<Receipt, SubmitError> submit_transaction(LedgerNode& node, const Transaction& tx) {
    Receipt receipt{tx.tx_id, node.config.fee};
    if (node.committed_tx_ids.count(tx.tx_id) || node.in_mempool(tx.tx_id)) return receipt;
    if (!verify_transaction(tx))
        return SubmitError{SubmitCode::RejectedInvalidSignature, "signature or tx id invalid"};
    auto it = node.committed_nonce.find(tx.sender.key);
    if (it != node.committed_nonce.end() && tx.nonce <= it->second)
        return SubmitError{SubmitCode::RejectedReplay, "nonce not above committed"};
    node.mempool.push_back(tx);
    return receipt;
}

// True iff genesis is well-formed, every link and hash recomputes, every
// transaction verifies and per-sender nonces strictly increase.
inline bool validate_chain(const std::vector<Block>& chain) {
    if (chain.empty()) return false;
    const Block& g = chain.front();
    if (g.height != 0 || g.prev_hash != kZeroKey || !g.txs.empty()) return false;
    if (g.block_hash != compute_block_hash(0, kZeroKey, {})) return false;

    std::map<Key32, uint64_t> nonces;
    for (size_t i = 0; i < chain.size(); ++i) {
        const Block& b = chain[i];
        if (b.height != i) return false;
        if (i > 0 && b.prev_hash != chain[i - 1].block_hash) return false;
        if (b.block_hash != compute_block_hash(b.height, b.prev_hash, b.txs)) return false;
        for (const auto& tx : b.txs) {
            if (!verify_transaction(tx)) return false;
            auto it = nonces.find(tx.sender.key);
            if (it != nonces.end() && tx.nonce <= it->second) return false;
            nonces[tx.sender.key] = tx.nonce;
        }
    }
    return true;
}

// ---- consensus ----

enum class NodeFault { None, VoteRefuse, Equivocate };

enum class RoundStatus { Committed, NoOp, Failed };

struct RoundResult {
    RoundStatus status = RoundStatus::NoOp;
    Block block;                 // valid when Committed
    uint32_t approvals = 0;
    uint32_t leader = 0;
};

// A set of full nodes sharing one config. Message passing is modeled as
// direct calls; the cluster is driven from a single deterministic loop.
class LedgerCluster {
public:
    LedgerCluster(LedgerConfig cfg, std::vector<PeerId> node_ids) : cfg_(std::move(cfg)) {
        if (!cfg_.mode.valid()) throw std::invalid_argument("quorum requires n >= 3f+1");
        if (cfg_.mode.quorum && node_ids.size() != cfg_.mode.n)
            throw std::invalid_argument("node count does not match quorum n");
        if (node_ids.empty()) throw std::invalid_argument("cluster needs at least one node");
        for (auto& id : node_ids) nodes_.emplace_back(id, cfg_);
        faults_.assign(nodes_.size(), NodeFault::None);
    }

    const LedgerConfig& config() const { return cfg_; }
    std::vector<LedgerNode>& nodes() { return nodes_; }
    LedgerNode& node(size_t i) { return nodes_.at(i); }
    const LedgerNode& node(size_t i) const { return nodes_.at(i); }
    size_t size() const { return nodes_.size(); }
    uint64_t failed_rounds() const { return failed_rounds_; }

    void set_fault(size_t node_index, NodeFault f) { faults_.at(node_index) = f; }
    NodeFault fault(size_t i) const { return faults_.at(i); }

    // Client-library submission: a peer submits through every full node.
    Expected<Receipt, SubmitError> submit(const Transaction& tx) {
        Expected<Receipt, SubmitError> first = submit_transaction(nodes_[0], tx);
        for (size_t i = 1; i < nodes_.size(); ++i) submit_transaction(nodes_[i], tx);
        return first;
    }

    // One proposal round. Empty-mempool rounds are no-ops, not failures.
    RoundResult run_round() {
        return cfg_.mode.quorum ? quorum_round() : authority_round();
    }

    // Look up a committed transaction on an honest node.
    std::optional<std::pair<uint64_t, Transaction>> find_committed(const Key32& tx_id) const {
        const LedgerNode& n = nodes_[honest_index()];
        for (const auto& b : n.chain)
            for (const auto& tx : b.txs)
                if (tx.tx_id == tx_id) return std::make_pair(b.height, tx);
        return std::nullopt;
    }

    const std::vector<Block>& chain() const { return nodes_[honest_index()].chain; }

private:
    size_t honest_index() const {
        for (size_t i = 0; i < faults_.size(); ++i)
            if (faults_[i] == NodeFault::None) return i;
        return 0;
    }

    // Drain a node's mempool into a block proposal: arrival order, keeping
    // per-sender nonces strictly increasing. Gaps are allowed.
    Block build_proposal(const LedgerNode& proposer) const {
        Block b;
        b.height = proposer.height() + 1;
        b.prev_hash = proposer.tip().block_hash;
        std::map<Key32, uint64_t> working = proposer.committed_nonce;
        for (const auto& tx : proposer.mempool) {
            auto it = working.find(tx.sender.key);
            if (it != working.end() && tx.nonce <= it->second) continue;
            working[tx.sender.key] = tx.nonce;
            b.txs.push_back(tx);
        }
        b.block_hash = compute_block_hash(b.height, b.prev_hash, b.txs);
        return b;
    }

    bool node_approves(const LedgerNode& voter, const Block& proposal) const {
        if (proposal.height != voter.height() + 1) return false;
        if (proposal.prev_hash != voter.tip().block_hash) return false;
        if (proposal.block_hash !=
            compute_block_hash(proposal.height, proposal.prev_hash, proposal.txs))
            return false;
        std::map<Key32, uint64_t> working = voter.committed_nonce;
        for (const auto& tx : proposal.txs) {
            if (!verify_transaction(tx)) return false;
            auto it = working.find(tx.sender.key);
            if (it != working.end() && tx.nonce <= it->second) return false;
            working[tx.sender.key] = tx.nonce;
        }
        return true;
    }

    RoundResult authority_round() {
        LedgerNode& authority = nodes_[0];
        if (authority.mempool.empty()) return {RoundStatus::NoOp, {}, 0, 0};
        Block b = build_proposal(authority);
        if (b.txs.empty()) return {RoundStatus::NoOp, {}, 0, 0};
        for (auto& n : nodes_) n.append_committed(b);
        return {RoundStatus::Committed, b, 1, 0};
    }

    RoundResult quorum_round() {
        uint32_t n = cfg_.mode.n;
        uint32_t leader =
            static_cast<uint32_t>((nodes_[honest_index()].height() + leader_shift_) % n);
        RoundResult res;
        res.leader = leader;

        // A refusing leader proposes nothing; an equivocating leader sends
        // conflicting proposals, which honest nodes detect and reject.
        if (faults_[leader] != NodeFault::None) {
            if (nodes_[honest_index()].mempool.empty()) return {RoundStatus::NoOp, {}, 0, leader};
            ++failed_rounds_;
            ++leader_shift_;
            res.status = RoundStatus::Failed;
            return res;
        }

        LedgerNode& proposer = nodes_[leader];
        if (proposer.mempool.empty()) return {RoundStatus::NoOp, {}, 0, leader};
        Block proposal = build_proposal(proposer);
        if (proposal.txs.empty()) return {RoundStatus::NoOp, {}, 0, leader};

        uint32_t approvals = 0;
        std::vector<Key32> voters;
        for (size_t i = 0; i < nodes_.size(); ++i) {
            // Equivocal votes are contradictory and never count cleanly.
            if (faults_[i] != NodeFault::None) continue;
            if (node_approves(nodes_[i], proposal)) {
                ++approvals;
                voters.push_back(nodes_[i].node_id.key);
            }
        }
        res.approvals = approvals;
        if (approvals < cfg_.mode.votes_needed()) {
            ++failed_rounds_;
            ++leader_shift_;
            res.status = RoundStatus::Failed;
            return res;
        }

        std::sort(voters.begin(), voters.end());
        proposal.committer_quorum = std::move(voters);
        // Faults are limited to voting behavior; every node still stores
        // the committed block.
        for (auto& node : nodes_) node.append_committed(proposal);
        res.status = RoundStatus::Committed;
        res.block = proposal;
        return res;
    }

    LedgerConfig cfg_;
    std::vector<LedgerNode> nodes_;
    std::vector<NodeFault> faults_;
    uint64_t failed_rounds_ = 0;
    uint64_t leader_shift_ = 0;
};

// ---- committed-state queries ----

struct QueryFilter {
    std::optional<Channel> channel;
    std::optional<Key32> sender;        // matches the signer
    std::optional<Key32> counterparty;  // matches ids referenced by the payload
    std::optional<std::pair<uint64_t, uint64_t>> height_range;  // inclusive
};

inline std::vector<std::pair<uint64_t, Transaction>> read_query(const LedgerNode& node,
                                                                const QueryFilter& filter) {
    std::vector<std::pair<uint64_t, Transaction>> out;
    for (const auto& b : node.chain) {
        if (filter.height_range &&
            (b.height < filter.height_range->first || b.height > filter.height_range->second))
            continue;
        for (const auto& tx : b.txs) {
            if (filter.channel && tx.channel != *filter.channel) continue;
            if (filter.sender && tx.sender.key != *filter.sender) continue;
            if (filter.counterparty) {
                auto parties = payload_counterparties(tx.channel, tx.payload);
                if (std::find(parties.begin(), parties.end(), *filter.counterparty) ==
                    parties.end())
                    continue;
            }
            out.emplace_back(b.height, tx);
        }
    }
    return out;
}

// ---- chain dump file ----
// Layout: magic "P2LK", version 0x01, config header (fee, currency,
// authority, mode), then blocks in canonical encoding until EOF. The
// config header lets `inspect` replay a dump with the right fee schedule
// and mint authority.

inline constexpr std::array<uint8_t, 4> kChainMagic = {0x50, 0x32, 0x4C, 0x4B};
inline constexpr uint8_t kChainVersion = 0x01;

struct ChainDump {
    LedgerConfig config;
    std::vector<Block> blocks;
};

inline Bytes encode_chain_dump(const LedgerConfig& cfg, const std::vector<Block>& blocks) {
    ByteWriter w;
    w.fixed(kChainMagic);
    w.u8(kChainVersion);
    w.u64(cfg.fee);
    w.str(cfg.currency_label);
    w.fixed(cfg.authority);
    w.u8(cfg.mode.quorum ? 1 : 0);
    w.u32(cfg.mode.n);
    w.u32(cfg.mode.f);
    for (const auto& b : blocks) encode_block(w, b);
    return w.take();
}

inline Expected<ChainDump, std::string> decode_chain_dump(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    auto magic = r.fixed<4>();
    if (!magic || *magic != kChainMagic) return std::string("bad magic, not a chain dump");
    auto version = r.u8();
    if (!version || *version != kChainVersion) return std::string("unsupported format version");
    ChainDump dump;
    auto fee = r.u64();
    auto currency = r.str(256);
    auto authority = r.fixed<32>();
    auto quorum = r.u8();
    auto n = r.u32();
    auto f = r.u32();
    if (!fee || !currency || !authority || !quorum || !n || !f)
        return std::string("truncated config header");
    dump.config.fee = *fee;
    dump.config.currency_label = *currency;
    dump.config.authority = *authority;
    dump.config.mode = *quorum ? LedgerMode::quorum_bft(*n, *f) : LedgerMode::single_authority();
    while (!r.done()) {
        auto b = decode_block(r);
        if (!b) return std::string("truncated or malformed block");
        dump.blocks.push_back(std::move(*b));
    }
    return dump;
}

}  // namespace p2piot
