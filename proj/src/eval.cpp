#include "dan/eval.hpp"

#include <algorithm>

#include "dan/container.hpp"
#include "dan/error.hpp"

namespace dan {

double evaluate_vqa(const RDanModel& model, const std::vector<VqaItem>& items) {
  if (items.empty()) throw ValueError("evaluate_vqa: empty split");
  std::vector<int> predictions;
  std::vector<std::map<int, int>> counts;
  predictions.reserve(items.size());
  for (const VqaItem& item : items) {
    Tape tape;
    RDanForwardOut out = rdan_forward(tape, item.scene.regions, item.question, model);
    predictions.push_back(predict_answer(out.probs));
    counts.push_back({{item.answer_id, 3}});
  }
  return mean_vqa_accuracy(predictions, counts);
}

double mean_vqa_accuracy(const std::vector<int>& predictions,
                         const std::vector<std::map<int, int>>& label_counts) {
  if (predictions.size() != label_counts.size())
    throw ValueError("mean_vqa_accuracy: size mismatch");
  if (predictions.empty()) throw ValueError("mean_vqa_accuracy: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    total += vqa_accuracy(predictions[i], label_counts[i]);
  return total / static_cast<double>(predictions.size());
}

RetrievalMetrics retrieval_metrics_from_scores(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::uint32_t>& query_ids,
    const std::vector<std::uint32_t>& gallery_ids, const std::vector<int>& ks) {
  if (scores.size() != query_ids.size())
    throw ValueError("retrieval metrics: score rows vs query ids mismatch");
  if (gallery_ids.empty()) throw ValueError("retrieval metrics: empty gallery");
  RetrievalMetrics metrics;
  for (std::size_t q = 0; q < scores.size(); ++q) {
    const std::vector<double>& s = scores[q];
    if (s.size() != gallery_ids.size())
      throw ValueError("retrieval metrics: score row size mismatch");
    std::size_t gt = gallery_ids.size();
    for (std::size_t g = 0; g < gallery_ids.size(); ++g)
      if (gallery_ids[g] == query_ids[q]) {
        gt = g;
        break;
      }
    if (gt == gallery_ids.size())
      throw ValueError("retrieval metrics: query " + std::to_string(query_ids[q]) +
                       " has no ground truth in the gallery");
    // Rank = 1 + number of gallery items strictly ahead under
    // (score desc, id asc).
    int rank = 1;
    for (std::size_t g = 0; g < gallery_ids.size(); ++g) {
      if (g == gt) continue;
      if (s[g] > s[gt] || (s[g] == s[gt] && gallery_ids[g] < gallery_ids[gt])) ++rank;
    }
    metrics.per_query_ranks.push_back(rank);
  }

  for (int k : ks) {
    if (k < 1) throw ValueError("retrieval metrics: recall cutoff must be >= 1");
    std::size_t hits = 0;
    for (int r : metrics.per_query_ranks)
      if (r <= k) ++hits;
    metrics.recall_at[k] =
        static_cast<double>(hits) / static_cast<double>(metrics.per_query_ranks.size());
  }

  std::vector<int> sorted = metrics.per_query_ranks;
  std::sort(sorted.begin(), sorted.end());
  metrics.median_rank = sorted[(sorted.size() - 1) / 2];  // lower median
  return metrics;
}

RetrievalEval evaluate_retrieval(const MDanModel& model,
                                 const std::vector<MatchingItem>& items,
                                 Direction direction, const std::vector<int>& ks) {
  if (items.empty()) throw ValueError("evaluate_retrieval: empty split");
  RetrievalEval eval;
  // Each item is embedded exactly once per modality; retrieval afterwards is
  // inner products only.
  std::vector<std::vector<double>> image_z, text_z;
  std::vector<std::uint32_t> ids;
  for (const MatchingItem& item : items) {
    {
      Tape tape;
      image_z.push_back(embed_image(tape, item.scene.regions, model).z->values);
      ++eval.image_embed_calls;
    }
    {
      Tape tape;
      text_z.push_back(embed_text(tape, item.caption, model).z->values);
      ++eval.text_embed_calls;
    }
    ids.push_back(item.id);
  }

  const auto& queries = direction == Direction::image_to_text ? image_z : text_z;
  const auto& gallery = direction == Direction::image_to_text ? text_z : image_z;
  std::vector<std::vector<double>> scores(queries.size(),
                                          std::vector<double>(gallery.size()));
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      double acc = 0.0;
      for (std::size_t j = 0; j < queries[q].size(); ++j)
        acc += queries[q][j] * gallery[g][j];
      scores[q][g] = acc;
    }
  eval.metrics = retrieval_metrics_from_scores(scores, ids, ids, ks);
  return eval;
}

std::vector<std::uint8_t> encode_embedding_record(const EmbeddingRecord& rec) {
  ByteWriter w;
  w.u8(rec.modality == Modality::image ? 0 : 1);
  w.u32(rec.item_id);
  w.u32(static_cast<std::uint32_t>(rec.values.size()));
  w.f64_span(rec.values.data(), rec.values.size());
  return w.take();
}

EmbeddingRecord decode_embedding_record(const std::vector<std::uint8_t>& payload) {
  ByteReader r(payload);
  EmbeddingRecord rec;
  rec.modality = r.u8() == 0 ? Modality::image : Modality::text;
  rec.item_id = r.u32();
  rec.values.resize(r.u32());
  r.f64_span(rec.values.data(), rec.values.size());
  if (!r.exhausted())
    throw IoError("malformed record: trailing bytes in embedding record");
  return rec;
}

void write_embeddings(const std::string& path,
                      const std::vector<EmbeddingRecord>& recs) {
  std::vector<std::vector<std::uint8_t>> records;
  records.reserve(recs.size());
  for (const EmbeddingRecord& r : recs) records.push_back(encode_embedding_record(r));
  write_container(path, records);
}

std::vector<EmbeddingRecord> read_embeddings(const std::string& path) {
  std::vector<EmbeddingRecord> recs;
  for (const auto& payload : read_container(path))
    recs.push_back(decode_embedding_record(payload));
  return recs;
}

}  // namespace dan
