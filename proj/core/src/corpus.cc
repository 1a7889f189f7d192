// Copyright 2026 The BRAN Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bran/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bran/error.h"
#include "bran/logging.h"
#include "bran/utf8.h"

namespace bran {
namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                       : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

int64_t ParseOffset(std::string_view field, const std::string& where) {
  if (field.empty()) throw ParseError(where + ": empty offset");
  int64_t value = 0;
  for (char c : field) {
    if (c < '0' || c > '9') throw ParseError(where + ": bad offset '" + std::string(field) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

std::vector<std::string> SplitIds(const std::string& id) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const size_t bar = id.find('|', start);
    std::string part = id.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (!part.empty()) parts.push_back(std::move(part));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return parts;
}

// Lines of one document before validation.
struct RawDocument {
  std::string doc_id;
  std::string title;
  std::string abstract_text;
  bool has_title = false;
  bool has_abstract = false;
  int first_line = 0;
  std::vector<std::pair<int, std::string>> annotation_lines;  // (line no, text)
};

std::string Where(const std::string& doc_id, int line_no) {
  return "document " + doc_id + ", line " + std::to_string(line_no);
}

void BuildEntities(Document& doc) {
  std::map<std::pair<EntityType, std::string>, std::vector<int>> groups;
  for (size_t m = 0; m < doc.mentions.size(); ++m) {
    const Mention& mention = doc.mentions[m];
    for (const std::string& id : SplitIds(mention.entity_id)) {
      groups[{mention.type, id}].push_back(static_cast<int>(m));
    }
  }
  doc.entities.clear();
  for (auto& [key, mentions] : groups) {
    doc.entities.push_back(Entity{key.second, key.first, std::move(mentions)});
  }
}

Document FinishDocument(RawDocument raw) {
  if (!raw.has_title || !raw.has_abstract) {
    throw ParseError(Where(raw.doc_id, raw.first_line) + ": missing title or abstract line");
  }
  Document doc;
  doc.doc_id = raw.doc_id;
  doc.title = std::move(raw.title);
  doc.abstract_text = std::move(raw.abstract_text);
  doc.text = doc.title + " " + doc.abstract_text;
  const std::vector<int64_t> offsets = CodePointOffsets(doc.text);
  const int64_t num_code_points = static_cast<int64_t>(offsets.size()) - 1;

  std::vector<Mention> mentions;
  std::set<RelationKey> relations;
  for (const auto& [line_no, line] : raw.annotation_lines) {
    const std::string where = Where(doc.doc_id, line_no);
    const auto fields = SplitTabs(line);
    if (fields.empty() || fields[0] != doc.doc_id) {
      throw ParseError(where + ": annotation for a different document");
    }
    if (fields.size() == 4) {
      if (fields[1] != "CID") {
        throw ParseError(where + ": unknown relation type '" + std::string(fields[1]) + "'");
      }
      relations.emplace(std::string(fields[2]), std::string(fields[3]));
      continue;
    }
    if (fields.size() != 6) {
      throw ParseError(where + ": expected 6 mention fields or 4 relation fields, got " +
                       std::to_string(fields.size()));
    }
    const int64_t start = ParseOffset(fields[1], where);
    const int64_t end = ParseOffset(fields[2], where);
    if (start >= end || end > num_code_points) {
      throw ParseError(where + ": offsets [" + std::to_string(start) + ", " +
                       std::to_string(end) + ") outside text of " +
                       std::to_string(num_code_points) + " characters");
    }
    Mention m;
    m.char_start = offsets[static_cast<size_t>(start)];
    m.char_end = offsets[static_cast<size_t>(end)];
    m.surface = std::string(fields[3]);
    if (doc.text.compare(static_cast<size_t>(m.char_start),
                         static_cast<size_t>(m.char_end - m.char_start), m.surface) != 0 ||
        m.char_end - m.char_start != static_cast<int64_t>(m.surface.size())) {
      throw ParseError(where + ": surface '" + m.surface + "' does not match text '" +
                       doc.text.substr(static_cast<size_t>(m.char_start),
                                       static_cast<size_t>(m.char_end - m.char_start)) +
                       "'");
    }
    try {
      m.type = ParseEntityType(fields[4]);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    m.entity_id = std::string(fields[5]);
    if (SplitIds(m.entity_id).empty()) throw ParseError(where + ": empty entity id");
    mentions.push_back(std::move(m));
  }

  // Deduplicate identical lines, then resolve overlaps (longer span wins,
  // earlier line wins among equal lengths).
  std::vector<Mention> kept;
  for (Mention& m : mentions) {
    bool drop = false;
    for (size_t k = 0; k < kept.size() && !drop; ++k) {
      Mention& other = kept[k];
      if (other == m) {
        drop = true;
        break;
      }
      const bool overlap = m.char_start < other.char_end && other.char_start < m.char_end;
      if (!overlap) continue;
      const int64_t len_new = m.char_end - m.char_start;
      const int64_t len_old = other.char_end - other.char_start;
      if (len_new > len_old) {
        LogWarning("document " + doc.doc_id + ": dropping mention '" + other.surface +
                   "' overlapped by longer '" + m.surface + "'");
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(k));
        --k;
      } else {
        LogWarning("document " + doc.doc_id + ": dropping mention '" + m.surface +
                   "' overlapped by '" + other.surface + "'");
        drop = true;
      }
    }
    if (!drop) kept.push_back(std::move(m));
  }
  std::sort(kept.begin(), kept.end(), [](const Mention& a, const Mention& b) {
    return std::tie(a.char_start, a.char_end) < std::tie(b.char_start, b.char_end);
  });
  doc.mentions = std::move(kept);
  BuildEntities(doc);

  doc.gold_relations.assign(relations.begin(), relations.end());
  for (const auto& [chemical, disease] : doc.gold_relations) {
    auto has = [&](const std::string& id, EntityType type) {
      return std::any_of(doc.entities.begin(), doc.entities.end(), [&](const Entity& e) {
        return e.entity_id == id && e.type == type;
      });
    };
    if (!has(chemical, EntityType::kChemical) || !has(disease, EntityType::kDisease)) {
      throw ParseError("document " + doc.doc_id + ": relation (" + chemical + ", " + disease +
                       ") names an entity without mentions");
    }
  }
  return doc;
}

}  // namespace

std::string_view EntityTypeName(EntityType type) {
  return type == EntityType::kChemical ? "Chemical" : "Disease";
}

EntityType ParseEntityType(std::string_view name) {
  if (name == "Chemical") return EntityType::kChemical;
  if (name == "Disease") return EntityType::kDisease;
  throw ParseError("unknown entity type '" + std::string(name) + "'");
}

std::vector<Document> ParsePubtator(std::string_view content) {
  std::vector<Document> docs;
  RawDocument current;
  bool open = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= content.size()) {
    size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    const bool at_end = nl >= content.size();
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (open) {
        docs.push_back(FinishDocument(std::move(current)));
        current = RawDocument{};
        open = false;
      }
      if (at_end) break;
      continue;
    }
    const size_t bar = line.find('|');
    const size_t tab = line.find('\t');
    const bool is_text_line = bar != std::string_view::npos &&
                              (tab == std::string_view::npos || bar < tab) &&
                              bar + 2 < line.size() && line[bar + 2] == '|';
    if (is_text_line) {
      const std::string doc_id(line.substr(0, bar));
      const char kind = line[bar + 1];
      const std::string body(line.substr(bar + 3));
      if (!open) {
        current.doc_id = doc_id;
        current.first_line = line_no;
        open = true;
      } else if (doc_id != current.doc_id) {
        throw ParseError(Where(doc_id, line_no) + ": missing blank line before new document");
      }
      if (kind == 't') {
        if (current.has_title) throw ParseError(Where(doc_id, line_no) + ": second title line");
        current.title = body;
        current.has_title = true;
      } else if (kind == 'a') {
        if (current.has_abstract) throw ParseError(Where(doc_id, line_no) + ": second abstract line");
        current.abstract_text = body;
        current.has_abstract = true;
      } else {
        throw ParseError(Where(doc_id, line_no) + ": unknown text line kind '" +
                         std::string(1, kind) + "'");
      }
    } else {
      if (!open) throw ParseError("line " + std::to_string(line_no) + ": annotation outside a document");
      current.annotation_lines.emplace_back(line_no, std::string(line));
    }
    if (at_end) break;
  }
  if (open) docs.push_back(FinishDocument(std::move(current)));
  return docs;
}

std::vector<Document> ReadPubtatorFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePubtator(buffer.str());
}

void WritePubtator(std::ostream& out, std::span<const Document> docs) {
  for (const Document& doc : docs) {
    out << doc.doc_id << "|t|" << doc.title << '\n';
    out << doc.doc_id << "|a|" << doc.abstract_text << '\n';
    const std::vector<int64_t> offsets = CodePointOffsets(doc.text);
    auto to_code_points = [&](int64_t byte) {
      return std::lower_bound(offsets.begin(), offsets.end(), byte) - offsets.begin();
    };
    for (const Mention& m : doc.mentions) {
      out << doc.doc_id << '\t' << to_code_points(m.char_start) << '\t'
          << to_code_points(m.char_end) << '\t' << m.surface << '\t'
          << EntityTypeName(m.type) << '\t' << m.entity_id << '\n';
    }
    for (const auto& [chemical, disease] : doc.gold_relations) {
      out << doc.doc_id << "\tCID\t" << chemical << '\t' << disease << '\n';
    }
    out << '\n';
  }
}

std::string ToPubtator(std::span<const Document> docs) {
  std::ostringstream out;
  WritePubtator(out, docs);
  return out.str();
}

void WritePubtatorFile(const std::string& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WritePubtator(out, docs);
}

std::string_view MentionCellsName(MentionCells mode) {
  return mode == MentionCells::kFirst ? "first" : "all";
}

MentionCells ParseMentionCells(std::string_view name) {
  if (name == "first") return MentionCells::kFirst;
  if (name == "all") return MentionCells::kAll;
  throw ConfigError("mention_cells must be 'first' or 'all', got '" + std::string(name) + "'");
}

void TokenizeDocument(const Vocabulary& vocab, Document& doc, MentionCells cells) {
  doc.tokens = Encode(vocab, doc.text);
  for (Mention& m : doc.mentions) {
    try {
      std::tie(m.first_token, m.last_token) = AlignSpan(doc.tokens, m.char_start, m.char_end);
    } catch (const AlignmentError& e) {
      throw AlignmentError("document " + doc.doc_id + ", mention '" + m.surface + "': " + e.what());
    }
  }
  doc.candidates = BuildPairs(doc, cells);
}

std::string_view BioTagName(BioTag tag) {
  switch (tag) {
    case BioTag::kOutside: return "O";
    case BioTag::kBeginChemical: return "B-Chemical";
    case BioTag::kInsideChemical: return "I-Chemical";
    case BioTag::kBeginDisease: return "B-Disease";
    case BioTag::kInsideDisease: return "I-Disease";
  }
  return "O";
}

bool IsValidBioSequence(std::span<const BioTag> tags) {
  BioTag prev = BioTag::kOutside;
  for (BioTag tag : tags) {
    if (tag == BioTag::kInsideChemical &&
        prev != BioTag::kBeginChemical && prev != BioTag::kInsideChemical) {
      return false;
    }
    if (tag == BioTag::kInsideDisease &&
        prev != BioTag::kBeginDisease && prev != BioTag::kInsideDisease) {
      return false;
    }
    prev = tag;
  }
  return true;
}

std::vector<BioTag> MakeBioTags(const Document& doc) {
  const size_t n = doc.tokens.token_ids.size();
  std::vector<BioTag> tags(n, BioTag::kOutside);
  std::vector<bool> taken(n, false);
  for (const Mention& m : doc.mentions) {
    if (m.first_token < 0) {
      throw ContractError("document " + doc.doc_id + " is not tokenized");
    }
    const bool chemical = m.type == EntityType::kChemical;
    bool first = true;
    for (int t = m.first_token; t <= m.last_token; ++t) {
      // A token shared with an earlier mention stays with that mention.
      if (taken[static_cast<size_t>(t)]) continue;
      taken[static_cast<size_t>(t)] = true;
      if (first) {
        tags[static_cast<size_t>(t)] = chemical ? BioTag::kBeginChemical : BioTag::kBeginDisease;
        first = false;
      } else {
        tags[static_cast<size_t>(t)] = chemical ? BioTag::kInsideChemical : BioTag::kInsideDisease;
      }
    }
  }
  return tags;
}

std::vector<CandidatePair> BuildPairs(const Document& doc, MentionCells cells) {
  std::vector<CandidatePair> pairs;
  const std::set<RelationKey> gold(doc.gold_relations.begin(), doc.gold_relations.end());
  for (size_t h = 0; h < doc.entities.size(); ++h) {
    const Entity& head = doc.entities[h];
    if (head.type != EntityType::kChemical) continue;
    for (size_t t = 0; t < doc.entities.size(); ++t) {
      const Entity& tail = doc.entities[t];
      if (tail.type != EntityType::kDisease) continue;
      CandidatePair pair;
      pair.head = static_cast<int>(h);
      pair.tail = static_cast<int>(t);
      pair.label = gold.count({head.entity_id, tail.entity_id}) != 0 ? RelationLabel::kCid
                                                                     : RelationLabel::kNull;
      for (int hm : head.mentions) {
        const Mention& a = doc.mentions[static_cast<size_t>(hm)];
        for (int tm : tail.mentions) {
          const Mention& b = doc.mentions[static_cast<size_t>(tm)];
          if (a.first_token < 0 || b.first_token < 0) {
            throw ContractError("document " + doc.doc_id + " is not tokenized");
          }
          if (cells == MentionCells::kFirst) {
            pair.cells.emplace_back(a.first_token, b.first_token);
          } else {
            for (int i = a.first_token; i <= a.last_token; ++i) {
              for (int j = b.first_token; j <= b.last_token; ++j) pair.cells.emplace_back(i, j);
            }
          }
        }
      }
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

PolarityIndex BuildPolarityIndex(std::span<const Document> docs) {
  PolarityIndex index;
  for (size_t d = 0; d < docs.size(); ++d) {
    bool pos = false, neg = false;
    for (const CandidatePair& c : docs[d].candidates) {
      (c.label == RelationLabel::kCid ? pos : neg) = true;
    }
    if (pos) index.positive_docs.push_back(static_cast<int>(d));
    if (neg) index.negative_docs.push_back(static_cast<int>(d));
  }
  if (index.positive_docs.empty() && !index.negative_docs.empty()) {
    LogWarning("corpus has no positive candidates; sampling negative batches only");
  } else if (index.negative_docs.empty() && !index.positive_docs.empty()) {
    LogWarning("corpus has no negative candidates; sampling positive batches only");
  }
  return index;
}

Minibatch SampleMinibatch(const PolarityIndex& index, std::mt19937_64& rng, int batch_size) {
  if (index.positive_docs.empty() && index.negative_docs.empty()) {
    throw ContractError("cannot sample from a corpus without candidates");
  }
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  Minibatch batch;
  const bool coin = (rng() >> 63) != 0;
  if (index.positive_docs.empty()) {
    batch.polarity = Polarity::kNegative;
  } else if (index.negative_docs.empty()) {
    batch.polarity = Polarity::kPositive;
  } else {
    batch.polarity = coin ? Polarity::kPositive : Polarity::kNegative;
  }
  const std::vector<int>& pool =
      batch.polarity == Polarity::kPositive ? index.positive_docs : index.negative_docs;
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  for (int i = 0; i < batch_size; ++i) batch.doc_indices.push_back(pool[pick(rng)]);
  return batch;
}

}  // namespace bran
