#ifndef DAN_EVAL_HPP_
#define DAN_EVAL_HPP_

#include <map>
#include <vector>

#include "dan/mdan.hpp"
#include "dan/rdan.hpp"
#include "dan/synth_data.hpp"

namespace dan {

// Mean of per-item vqa_accuracy with predictions from the model (dropout
// off). Synthetic items imply a single gold answer with count 3.
double evaluate_vqa(const RDanModel& model, const std::vector<VqaItem>& items);

// Metric layer, separated so random instances can exercise it directly.
double mean_vqa_accuracy(const std::vector<int>& predictions,
                         const std::vector<std::map<int, int>>& label_counts);

struct RetrievalMetrics {
  std::map<int, double> recall_at;
  double median_rank = 0.0;        // lower median over queries
  std::vector<int> per_query_ranks;  // 1-based ground-truth ranks
};

enum class Direction { image_to_text, text_to_image };

// Scores are [queries x gallery]; ground truth for query q is the gallery
// item with gallery_ids[g] == query_ids[q]. Ranking is by score descending
// with ties broken by gallery item id ascending.
RetrievalMetrics retrieval_metrics_from_scores(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::uint32_t>& query_ids,
    const std::vector<std::uint32_t>& gallery_ids, const std::vector<int>& ks);

struct RetrievalEval {
  RetrievalMetrics metrics;
  std::size_t image_embed_calls = 0;  // exactly one embedding per item
  std::size_t text_embed_calls = 0;
};

RetrievalEval evaluate_retrieval(const MDanModel& model,
                                 const std::vector<MatchingItem>& items,
                                 Direction direction, const std::vector<int>& ks);

struct EmbeddingRecord {
  Modality modality = Modality::image;
  std::uint32_t item_id = 0;
  std::vector<double> values;
};

// Embedding export shares the dataset record container.
std::vector<std::uint8_t> encode_embedding_record(const EmbeddingRecord& rec);
EmbeddingRecord decode_embedding_record(const std::vector<std::uint8_t>& payload);
void write_embeddings(const std::string& path, const std::vector<EmbeddingRecord>& recs);
std::vector<EmbeddingRecord> read_embeddings(const std::string& path);

}  // namespace dan

#endif  // DAN_EVAL_HPP_
