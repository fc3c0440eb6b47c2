// Frequent itemset mining. The main miner is a nodeset algorithm over a
// prefix tree with per-node bitmap codes: each item gets a bit, each tree
// node carries the OR of its ancestors' bits, and a candidate's support
// is maintained as the parent support minus the mass of the nodes whose
// paths lack the extending item. A levelwise Apriori implementation over
// transaction bitmasks serves as the verification oracle (≤ 20 items).
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "citymine/errors.hpp"
#include "citymine/text.hpp"

namespace citymine {

struct ItemUniverse {
    std::vector<std::string> items; // sorted, distinct
    std::map<std::string, std::int32_t> index;
};

struct TransactionDatabase {
    ItemUniverse universe;
    std::vector<std::vector<std::int32_t>> transactions; // ascending index lists
    std::size_t size() const { return transactions.size(); }
};

struct FrequentItemset {
    std::vector<std::string> items; // sorted tokens
    std::uint64_t support = 0;
    double relative_support = 0.0;
};

struct MiningParams {
    double minsup_relative = 0.10;
};

inline TransactionDatabase build_database(const std::vector<std::vector<std::string>>& raw) {
    if (raw.empty()) throw DataError("transaction database must contain at least one transaction");
    TransactionDatabase db;
    std::set<std::string> tokens;
    for (const auto& t : raw) tokens.insert(t.begin(), t.end());
    db.universe.items.assign(tokens.begin(), tokens.end());
    for (std::size_t i = 0; i < db.universe.items.size(); ++i)
        db.universe.index[db.universe.items[i]] = static_cast<std::int32_t>(i);
    db.transactions.reserve(raw.size());
    for (const auto& t : raw) {
        std::set<std::int32_t> idx;
        for (const std::string& tok : t) idx.insert(db.universe.index.at(tok));
        db.transactions.emplace_back(idx.begin(), idx.end());
    }
    return db;
}

inline std::uint64_t support(const TransactionDatabase& db, const std::vector<std::string>& itemset) {
    std::vector<std::int32_t> want;
    for (const std::string& tok : itemset) {
        auto it = db.universe.index.find(tok);
        if (it == db.universe.index.end()) return 0;
        want.push_back(it->second);
    }
    std::sort(want.begin(), want.end());
    want.erase(std::unique(want.begin(), want.end()), want.end());
    std::uint64_t count = 0;
    for (const auto& t : db.transactions)
        if (std::includes(t.begin(), t.end(), want.begin(), want.end())) ++count;
    return count;
}

inline double relative_support(const TransactionDatabase& db, const std::vector<std::string>& itemset) {
    return static_cast<double>(support(db, itemset)) / static_cast<double>(db.size());
}

// Smallest absolute count c ≥ 1 whose relative support c/n clears the
// threshold, using the exact division later reported for the itemsets.
inline std::uint64_t minsup_absolute(std::size_t n, double minsup_relative) {
    if (!(minsup_relative > 0.0) || minsup_relative > 1.0)
        throw ConfigError("minsup_relative must be in (0, 1]");
    if (n == 0) throw DataError("empty database");
    auto nd = static_cast<double>(n);
    auto satisfies = [&](std::uint64_t c) { return static_cast<double>(c) / nd >= minsup_relative; };
    auto c = static_cast<std::uint64_t>(minsup_relative * nd);
    while (c > 0 && satisfies(c)) --c;
    ++c;
    while (!satisfies(c)) ++c;
    return std::max<std::uint64_t>(c, 1);
}

inline std::string fi_key(const std::vector<std::string>& items) { return join(items, " "); }

// Canonical output order: by length, then lexicographically by token list.
inline void canonical_sort(std::vector<FrequentItemset>& fis) {
    std::sort(fis.begin(), fis.end(), [](const FrequentItemset& a, const FrequentItemset& b) {
        if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
        return a.items < b.items;
    });
}

namespace detail::fim {

// Prefix tree over support-descending items, one bitmap bit per item.
struct BmcTree {
    std::size_t words = 0;
    std::vector<std::int32_t> item;          // rank per node
    std::vector<std::uint32_t> count;        // transactions through node
    std::vector<std::int32_t> first_child;
    std::vector<std::int32_t> next_sibling;
    std::vector<std::uint64_t> bmc;          // `words` entries per node

    bool has_bit(std::int32_t node, std::int32_t rank) const {
        return (bmc[static_cast<std::size_t>(node) * words + static_cast<std::size_t>(rank >> 6)] >>
                (rank & 63)) & 1u;
    }
};

struct SetEnumNode {
    std::int32_t item = -1;  // rank
    std::uint64_t support = 0;
    std::vector<std::int32_t> nodes;
};

struct Miner {
    const BmcTree& tree;
    std::uint64_t minsup;
    std::vector<FrequentItemset>* out;
    const std::vector<std::string>* rank_token; // rank -> token
    std::size_t n;

    std::vector<std::int32_t> itemset; // ranks along current path
    std::vector<std::int32_t> equiv;   // promoted ranks along current path

    void emit(std::uint64_t sup) {
        // current itemset joined with every subset of the promoted items
        std::uint64_t subsets = 1ull << equiv.size();
        for (std::uint64_t mask = 0; mask < subsets; ++mask) {
            FrequentItemset fi;
            fi.items.reserve(itemset.size() + static_cast<std::size_t>(__builtin_popcountll(mask)));
            for (std::int32_t r : itemset) fi.items.push_back((*rank_token)[static_cast<std::size_t>(r)]);
            for (std::size_t e = 0; e < equiv.size(); ++e)
                if (mask >> e & 1)
                    fi.items.push_back((*rank_token)[static_cast<std::size_t>(equiv[e])]);
            std::sort(fi.items.begin(), fi.items.end());
            fi.support = sup;
            fi.relative_support = static_cast<double>(sup) / static_cast<double>(n);
            out->push_back(std::move(fi));
        }
    }

    // `cur` carries the itemset's node list; `later` are the more-frequent
    // candidate extensions built at the same parent.
    void visit(SetEnumNode& cur, std::vector<SetEnumNode>& siblings, std::size_t next_sibling_idx,
               int level) {
        std::size_t equiv_mark = equiv.size();
        std::vector<SetEnumNode> children;
        for (std::size_t s = next_sibling_idx; s < siblings.size(); ++s) {
            const SetEnumNode& sib = siblings[s];
            SetEnumNode child;
            child.item = sib.item;
            std::uint64_t removed = 0;
            if (level == 1) {
                // nodes of cur's item whose path lacks the extension
                for (std::int32_t nd : cur.nodes)
                    if (!tree.has_bit(nd, sib.item)) {
                        child.nodes.push_back(nd);
                        removed += tree.count[static_cast<std::size_t>(nd)];
                    }
            } else {
                // sibling's node list narrowed to paths containing cur's item
                for (std::int32_t nd : sib.nodes)
                    if (tree.has_bit(nd, cur.item)) {
                        child.nodes.push_back(nd);
                        removed += tree.count[static_cast<std::size_t>(nd)];
                    }
            }
            std::uint64_t sup = cur.support - removed;
            if (sup < minsup) continue;
            if (sup == cur.support) {
                equiv.push_back(sib.item); // extension adds no constraint below cur
            } else {
                child.support = sup;
                children.push_back(std::move(child));
            }
        }
        emit(cur.support);
        for (std::size_t c = 0; c < children.size(); ++c) {
            itemset.push_back(children[c].item);
            visit(children[c], children, c + 1, level + 1);
            itemset.pop_back();
        }
        equiv.resize(equiv_mark);
    }
};

} // namespace detail::fim

inline std::vector<FrequentItemset> mine_frequent_itemsets_abs(const TransactionDatabase& db,
                                                               std::uint64_t minsup_abs) {
    if (db.size() == 0) throw DataError("empty database");
    if (minsup_abs == 0) minsup_abs = 1;
    std::size_t m = db.universe.items.size();
    std::size_t n = db.size();

    std::vector<std::uint64_t> item_count(m, 0);
    for (const auto& t : db.transactions)
        for (std::int32_t i : t) ++item_count[static_cast<std::size_t>(i)];

    // ranks: descending support, ties by token
    std::vector<std::int32_t> frequent;
    for (std::size_t i = 0; i < m; ++i)
        if (item_count[i] >= minsup_abs) frequent.push_back(static_cast<std::int32_t>(i));
    std::sort(frequent.begin(), frequent.end(), [&](std::int32_t a, std::int32_t b) {
        if (item_count[static_cast<std::size_t>(a)] != item_count[static_cast<std::size_t>(b)])
            return item_count[static_cast<std::size_t>(a)] > item_count[static_cast<std::size_t>(b)];
        return db.universe.items[static_cast<std::size_t>(a)] < db.universe.items[static_cast<std::size_t>(b)];
    });
    if (frequent.empty()) return {};

    std::size_t fm = frequent.size();
    std::vector<std::int32_t> rank_of(m, -1);
    std::vector<std::string> rank_token(fm);
    for (std::size_t r = 0; r < fm; ++r) {
        rank_of[static_cast<std::size_t>(frequent[r])] = static_cast<std::int32_t>(r);
        rank_token[r] = db.universe.items[static_cast<std::size_t>(frequent[r])];
    }

    // prefix tree
    detail::fim::BmcTree tree;
    tree.words = (fm + 63) / 64;
    auto add_node = [&](std::int32_t item_rank) {
        tree.item.push_back(item_rank);
        tree.count.push_back(0);
        tree.first_child.push_back(-1);
        tree.next_sibling.push_back(-1);
        return static_cast<std::int32_t>(tree.item.size()) - 1;
    };
    add_node(-1); // root
    std::vector<std::int32_t> ranks;
    for (const auto& t : db.transactions) {
        ranks.clear();
        for (std::int32_t i : t) {
            std::int32_t r = rank_of[static_cast<std::size_t>(i)];
            if (r >= 0) ranks.push_back(r);
        }
        std::sort(ranks.begin(), ranks.end()); // most frequent first along the path
        std::int32_t node = 0;
        for (std::int32_t r : ranks) {
            std::int32_t child = tree.first_child[static_cast<std::size_t>(node)];
            std::int32_t prev = -1;
            while (child != -1 && tree.item[static_cast<std::size_t>(child)] < r) {
                prev = child;
                child = tree.next_sibling[static_cast<std::size_t>(child)];
            }
            if (child == -1 || tree.item[static_cast<std::size_t>(child)] != r) {
                std::int32_t fresh = add_node(r);
                tree.next_sibling[static_cast<std::size_t>(fresh)] = child;
                if (prev == -1) tree.first_child[static_cast<std::size_t>(node)] = fresh;
                else tree.next_sibling[static_cast<std::size_t>(prev)] = fresh;
                child = fresh;
            }
            ++tree.count[static_cast<std::size_t>(child)];
            node = child;
        }
    }

    // bitmap codes and per-rank node lists in one preorder pass
    std::size_t node_count = tree.item.size();
    tree.bmc.assign(node_count * tree.words, 0);
    std::vector<std::vector<std::int32_t>> nodes_of_rank(fm);
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        std::int32_t nd = stack.back();
        stack.pop_back();
        if (nd != 0) {
            auto r = static_cast<std::size_t>(tree.item[static_cast<std::size_t>(nd)]);
            nodes_of_rank[r].push_back(nd);
        }
        // push children in reverse so preorder visits low ranks first
        std::vector<std::int32_t> kids;
        for (std::int32_t c = tree.first_child[static_cast<std::size_t>(nd)]; c != -1;
             c = tree.next_sibling[static_cast<std::size_t>(c)])
            kids.push_back(c);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
            std::int32_t c = *it;
            auto coff = static_cast<std::size_t>(c) * tree.words;
            auto poff = static_cast<std::size_t>(nd) * tree.words;
            for (std::size_t w = 0; w < tree.words; ++w) tree.bmc[coff + w] = tree.bmc[poff + w];
            std::int32_t r = tree.item[static_cast<std::size_t>(c)];
            tree.bmc[coff + static_cast<std::size_t>(r >> 6)] |= 1ull << (r & 63);
            stack.push_back(c);
        }
    }

    std::vector<FrequentItemset> out;
    detail::fim::Miner miner{tree, minsup_abs, &out, &rank_token, n, {}, {}};
    // level-1 nodes, least frequent first; extensions are the more frequent items
    std::vector<detail::fim::SetEnumNode> roots(fm);
    for (std::size_t r = 0; r < fm; ++r) {
        auto rank = static_cast<std::int32_t>(fm - 1 - r);
        roots[r].item = rank;
        roots[r].nodes = std::move(nodes_of_rank[static_cast<std::size_t>(rank)]);
        roots[r].support = item_count[static_cast<std::size_t>(frequent[static_cast<std::size_t>(rank)])];
    }
    for (std::size_t r = 0; r < fm; ++r) {
        miner.itemset.push_back(roots[r].item);
        miner.visit(roots[r], roots, r + 1, 1);
        miner.itemset.pop_back();
    }
    canonical_sort(out);
    return out;
}

inline std::vector<FrequentItemset> mine_frequent_itemsets(const TransactionDatabase& db,
                                                           const MiningParams& params) {
    return mine_frequent_itemsets_abs(db, minsup_absolute(db.size(), params.minsup_relative));
}

inline std::vector<FrequentItemset> mine_frequent_itemsets_oracle_abs(const TransactionDatabase& db,
                                                                      std::uint64_t minsup_abs) {
    std::size_t m = db.universe.items.size();
    if (m > 20) throw ConfigError("oracle miner supports at most 20 distinct items");
    if (db.size() == 0) throw DataError("empty database");
    if (minsup_abs == 0) minsup_abs = 1;
    std::size_t n = db.size();

    std::vector<std::uint32_t> masks(n, 0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::int32_t i : db.transactions[t]) masks[t] |= 1u << i;

    auto count_mask = [&](std::uint32_t c) {
        std::uint64_t cnt = 0;
        for (std::uint32_t tm : masks)
            if ((tm & c) == c) ++cnt;
        return cnt;
    };

    std::vector<FrequentItemset> out;
    auto emit = [&](std::uint32_t mask, std::uint64_t sup) {
        FrequentItemset fi;
        for (std::size_t i = 0; i < m; ++i)
            if (mask >> i & 1) fi.items.push_back(db.universe.items[i]);
        fi.support = sup;
        fi.relative_support = static_cast<double>(sup) / static_cast<double>(n);
        out.push_back(std::move(fi));
    };

    // level 1
    std::vector<std::uint32_t> level;
    std::unordered_set<std::uint32_t> frequent_masks;
    for (std::size_t i = 0; i < m; ++i) {
        std::uint32_t c = 1u << i;
        std::uint64_t sup = count_mask(c);
        if (sup >= minsup_abs) {
            emit(c, sup);
            level.push_back(c);
            frequent_masks.insert(c);
        }
    }
    // levelwise join + prune + count
    while (!level.empty()) {
        std::vector<std::uint32_t> next;
        std::unordered_set<std::uint32_t> seen;
        for (std::size_t a = 0; a < level.size(); ++a) {
            for (std::size_t b = a + 1; b < level.size(); ++b) {
                std::uint32_t u = level[a] | level[b];
                if (static_cast<std::size_t>(__builtin_popcount(u)) !=
                    static_cast<std::size_t>(__builtin_popcount(level[a])) + 1)
                    continue;
                if (!seen.insert(u).second) continue;
                // prune: all one-smaller subsets frequent
                bool ok = true;
                for (std::size_t i = 0; i < m && ok; ++i)
                    if (u >> i & 1)
                        if (!frequent_masks.count(u & ~(1u << i))) ok = false;
                if (!ok) continue;
                std::uint64_t sup = count_mask(u);
                if (sup >= minsup_abs) {
                    emit(u, sup);
                    next.push_back(u);
                }
            }
        }
        for (std::uint32_t c : next) frequent_masks.insert(c);
        level = std::move(next);
    }
    canonical_sort(out);
    return out;
}

inline std::vector<FrequentItemset> mine_frequent_itemsets_oracle(const TransactionDatabase& db,
                                                                  const MiningParams& params) {
    return mine_frequent_itemsets_oracle_abs(db, minsup_absolute(db.size(), params.minsup_relative));
}

inline std::string fi_to_csv(const std::vector<FrequentItemset>& fis) {
    std::string out = "itemset,support,relative_support\n";
    for (const FrequentItemset& fi : fis) {
        out += csv_field(fi_key(fi.items));
        out += ',';
        out += std::to_string(fi.support);
        out += ',';
        out += fmt_fixed(fi.relative_support, 6);
        out += '\n';
    }
    return out;
}

inline void write_fi_csv(const std::vector<FrequentItemset>& fis, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << fi_to_csv(fis);
}

inline std::vector<FrequentItemset> read_fi_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || split(trim(line), ',') != std::vector<std::string>{"itemset", "support", "relative_support"})
        throw DataError("bad FI CSV header in " + path.string());
    std::vector<FrequentItemset> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = csv_split(trim(line));
        if (fields.size() != 3) throw DataError("bad FI CSV row in " + path.string() + ": " + line);
        FrequentItemset fi;
        fi.items = split_tokens(fields[0]);
        fi.support = parse_u64(fields[1]);
        fi.relative_support = parse_double(fields[2]);
        out.push_back(std::move(fi));
    }
    return out;
}

} // namespace citymine
