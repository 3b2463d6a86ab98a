#include "dmon/types.hpp"

#include <set>
#include <utility>

namespace dmon {

void validate_document(const Document& doc) {
  if (doc.doc_id.empty()) throw ValidationError("document has an empty doc_id");
  if (doc.sentences.empty()) {
    throw ValidationError("document '" + doc.doc_id + "' has no sentences");
  }
  const int n = doc.size();
  std::set<std::pair<int, int>> seen;
  for (const Relation& r : doc.relations) {
    if (r.head < 0 || r.head >= n || r.tail < 0 || r.tail >= n) {
      throw ValidationError("document '" + doc.doc_id + "': relation (" +
                            std::to_string(r.head) + ", " + std::to_string(r.tail) +
                            ") is out of range for " + std::to_string(n) + " sentences");
    }
    if (r.head == r.tail) {
      throw ValidationError("document '" + doc.doc_id + "': relation on the diagonal (" +
                            std::to_string(r.head) + ", " + std::to_string(r.tail) + ")");
    }
    if (!seen.insert({r.head, r.tail}).second) {
      throw ValidationError("document '" + doc.doc_id + "': duplicate relation pair (" +
                            std::to_string(r.head) + ", " + std::to_string(r.tail) + ")");
    }
    if (r.label.empty()) {
      throw ValidationError("document '" + doc.doc_id + "': relation with an empty label");
    }
  }
}

void validate_document(const Document& doc, const LabelSpace& space) {
  validate_document(doc);
  space.validate();
  for (const Relation& r : doc.relations) {
    if (!space.find(r.label)) {
      throw ValidationError("document '" + doc.doc_id + "': label '" + r.label +
                            "' is not in the label space");
    }
    if (r.label == space.no_relation_label()) {
      throw ValidationError("document '" + doc.doc_id +
                            "': explicit relation carries the no-relation label '" + r.label +
                            "'");
    }
  }
}

}  // namespace dmon
