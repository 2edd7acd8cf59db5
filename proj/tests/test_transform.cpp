#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "vicoref/sacr.hpp"
#include "vicoref/transform.hpp"

using namespace vicoref;

namespace {

const std::string kAnnotatedExcerpt =
    "{M1 Em} trân trọng {M2 hai người bạn} rất thân; {M2 các bạn} bị {M3 một nhóm bạn khác} "
    "nói xấu rất nhiều, từ tính cách, lời nói, dáng đi. {M1 Em} chắc chắn trước đó "
    "{M2 hai bạn} không đả động gì tới {M3 nhóm bạn đó}...";

const std::string kIndexedExcerpt =
    "[Em]#1 trân trọng [hai người bạn]#2 rất thân; [các bạn]#3 bị [một nhóm bạn khác]#4 "
    "nói xấu rất nhiều, từ tính cách, lời nói, dáng đi. [Em]#5 chắc chắn trước đó "
    "[hai bạn]#6 không đả động gì tới [nhóm bạn đó]#7...";

AnnotatedDocument parse_ok(const std::string& text) { return parse_sacr(text).doc; }

}  // namespace

TEST_CASE("indexing renders the worked seven-mention excerpt") {
  const IndexedDocument indexed = index_document(parse_ok(kAnnotatedExcerpt));
  REQUIRE(indexed.indexed_text == kIndexedExcerpt);
  REQUIRE(indexed.mention_table.size() == 7);
  REQUIRE(indexed.mention_table[0] == MentionRow{1, "Em", 1});
  REQUIRE(indexed.mention_table[2] == MentionRow{3, "các bạn", 2});
  REQUIRE(indexed.mention_table[6] == MentionRow{7, "nhóm bạn đó", 3});
}

TEST_CASE("indexing a zero-mention document is the identity") {
  const auto doc = parse_ok("văn bản không có chú thích");
  const IndexedDocument indexed = index_document(doc);
  REQUIRE(indexed.indexed_text == doc.plain_text);
  REQUIRE(indexed.mention_table.empty());
}

TEST_CASE("nested mentions keep the inner marker inside the outer brackets") {
  const IndexedDocument indexed =
      index_document(parse_ok("{M1 Mẹ của {M2 tôi}} thường thức dậy."));
  REQUIRE(indexed.indexed_text == "[Mẹ của [tôi]#2]#1 thường thức dậy.");
}

TEST_CASE("gold clusters group tag indices by tag number") {
  REQUIRE(build_gold_clusters(parse_ok(kAnnotatedExcerpt)).clusters ==
          std::vector<std::vector<int>>{{1, 5}, {2, 3, 6}, {4, 7}});
  REQUIRE(build_gold_clusters(parse_ok("{M1 một mình}")).clusters ==
          std::vector<std::vector<int>>{{1}});
  REQUIRE(build_gold_clusters(parse_ok("{M1 Mẹ của {M2 tôi}}")).clusters ==
          std::vector<std::vector<int>>{{1}, {2}});
}

TEST_CASE("gold clusters always cover the whole mention set") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int i = 0; i < n; ++i) {
      text += "{M" + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng)) + " w" +
              std::to_string(i) + "} ";
    }
    const auto doc = parse_ok(text);
    const ClusterSet gold = build_gold_clusters(doc);
    REQUIRE(validate_gold(gold).empty());
    std::size_t covered = 0;
    for (const auto& c : gold.clusters) covered += c.size();
    REQUIRE(covered == doc.mentions.size());
    std::vector<int> tags;
    for (const auto& m : doc.mentions) tags.push_back(m.tag_number);
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    REQUIRE(gold.clusters.size() == tags.size());
  }
}

TEST_CASE("parse_indexed inverts index_document") {
  const std::vector<std::string> inputs = {
      kAnnotatedExcerpt,
      "{M1 Mẹ của {M2 tôi}} thường thức dậy.",
      "không có chú thích",
      "{M2 Hai đứa} chơi với {M1 ông của {M2 chúng}}.",
  };
  for (const auto& text : inputs) {
    const auto doc = parse_ok(text);
    const IndexedDocument indexed = index_document(doc);
    const IndexedParseResult back = parse_indexed(indexed.indexed_text);
    REQUIRE(back.plain_text == doc.plain_text);
    REQUIRE(back.mentions.size() == indexed.mention_table.size());
    for (std::size_t i = 0; i < back.mentions.size(); ++i) {
      REQUIRE(back.mentions[i].marker == indexed.mention_table[i].tag_index);
      REQUIRE(back.mentions[i].surface == indexed.mention_table[i].surface);
    }
  }
}

TEST_CASE("parse_indexed keeps unmatched markup as literal text") {
  const auto unopened = parse_indexed("a ]#2 b ] c");
  REQUIRE(unopened.plain_text == "a ]#2 b ] c");
  REQUIRE(unopened.mentions.empty());

  const auto unclosed = parse_indexed("a [ b c");
  REQUIRE(unclosed.plain_text == "a [ b c");
  REQUIRE(unclosed.mentions.empty());

  const auto wellformed = parse_indexed("a [ c ]#2 d");
  REQUIRE(wellformed.plain_text == "a  c  d");
  REQUIRE(wellformed.mentions.size() == 1);
  REQUIRE(wellformed.mentions[0].marker == 2);
  REQUIRE(wellformed.mentions[0].surface == " c ");
}

TEST_CASE("corpus_stats averages tokens, mentions and entities") {
  const auto doc = parse_ok("{M1 Bé} ăn cơm với {M2 mẹ} rồi {M1 bé} ngủ trưa nhé");
  REQUIRE(token_count(doc.plain_text) == 10);
  const CorpusStats stats = corpus_stats({doc});
  REQUIRE(stats.total_documents == 1);
  REQUIRE(stats.avg_length_tokens == 10.0);
  REQUIRE(stats.avg_mentions == 3.0);
  REQUIRE(stats.avg_entities == 2.0);
}

TEST_CASE("corpus_stats of an empty document is zero") {
  const CorpusStats stats = corpus_stats({AnnotatedDocument{"empty", "", {}}});
  REQUIRE(stats.total_documents == 1);
  REQUIRE(stats.avg_length_tokens == 0.0);
  REQUIRE(stats.avg_mentions == 0.0);
  REQUIRE(stats.avg_entities == 0.0);
}

TEST_CASE("corpus_stats rejects the empty corpus") {
  REQUIRE_THROWS_AS(corpus_stats({}), EmptyCorpusError);
}

TEST_CASE("stats display rounds to one decimal and trims .0") {
  REQUIRE(format_average(248.6) == "248.6");
  REQUIRE(format_average(31.0) == "31");
  REQUIRE(format_average(8.6) == "8.6");
  REQUIRE(format_average(0.0) == "0");
  CorpusStats stats;
  stats.total_documents = 3;
  stats.avg_length_tokens = 248.6;
  stats.avg_mentions = 31.0;
  stats.avg_entities = 8.6;
  REQUIRE(stats_row(stats) == "3\t248.6\t31\t8.6");
}
