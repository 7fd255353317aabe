#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "copred/common.hpp"
#include "copred/dataset.hpp"

namespace copred {

enum class SegmentKind { context, soft_slot, mention, literal, pmask_slot, nmask_slot };

struct PromptSegment {
  SegmentKind kind;
  std::vector<std::string> tokens;  // context / mention / literal only
  int soft_index = -1;              // soft_slot only
};

// Serialized token layout of the co-prediction template:
//   {c} [P] {m} belongs to [PMASK] rather than [NMASK]
// In baseline mode the trailing "rather than [NMASK]" is stripped and a
// single mask remains.
struct PromptInstance {
  std::vector<PromptSegment> segments;
  int n_soft = 0;
  bool baseline = false;

  void validate() const {
    int pmask = 0, nmask = 0, pmask_at = -1, nmask_at = -1;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].kind == SegmentKind::pmask_slot) {
        ++pmask;
        pmask_at = static_cast<int>(i);
      } else if (segments[i].kind == SegmentKind::nmask_slot) {
        ++nmask;
        nmask_at = static_cast<int>(i);
      }
    }
    if (pmask != 1) fail_validation("prompt instance must contain exactly one PMASK slot");
    if (!baseline) {
      if (nmask != 1) fail_validation("prompt instance must contain exactly one NMASK slot");
      if (nmask_at < pmask_at) fail_validation("PMASK slot must precede NMASK slot");
    } else if (nmask != 0) {
      fail_validation("baseline prompt instance must not contain an NMASK slot");
    }
  }
};

// Context block is left + mention + right; the mention repeats inside the
// template after the soft slots.
inline PromptInstance build_prompt_instance(const MentionExample& example, int n_soft,
                                            bool baseline = false) {
  if (n_soft < 0) fail_validation("n_soft must be >= 0, got ", n_soft);
  if (example.mention.empty()) fail_validation("example mention must be non-empty");

  PromptInstance inst;
  inst.n_soft = n_soft;
  inst.baseline = baseline;

  PromptSegment context{SegmentKind::context, {}, -1};
  context.tokens = example.left_context;
  context.tokens.insert(context.tokens.end(), example.mention.begin(), example.mention.end());
  context.tokens.insert(context.tokens.end(), example.right_context.begin(),
                        example.right_context.end());
  inst.segments.push_back(std::move(context));

  for (int i = 0; i < n_soft; ++i) {
    inst.segments.push_back(PromptSegment{SegmentKind::soft_slot, {}, i});
  }
  inst.segments.push_back(PromptSegment{SegmentKind::mention, example.mention, -1});
  inst.segments.push_back(PromptSegment{SegmentKind::literal, {"belongs", "to"}, -1});
  inst.segments.push_back(PromptSegment{SegmentKind::pmask_slot, {}, -1});
  if (!baseline) {
    inst.segments.push_back(PromptSegment{SegmentKind::literal, {"rather", "than"}, -1});
    inst.segments.push_back(PromptSegment{SegmentKind::nmask_slot, {}, -1});
  }
  inst.validate();
  return inst;
}

// Reserved surface forms for the trainable slots.
struct MarkerMap {
  std::vector<std::string> soft_markers;
  std::string pmask_marker = "[PMASK]";
  std::string nmask_marker = "[NMASK]";

  static MarkerMap standard(int n_soft) {
    MarkerMap m;
    for (int i = 0; i < n_soft; ++i) m.soft_markers.push_back(concat("[SOFT", i, "]"));
    return m;
  }

  const std::string& soft(int index) const {
    if (index < 0 || index >= static_cast<int>(soft_markers.size())) {
      fail_validation("no marker for soft slot ", index);
    }
    return soft_markers[static_cast<std::size_t>(index)];
  }
};

struct RenderedPrompt {
  std::vector<std::string> tokens;
  int pmask_pos = -1;
  int nmask_pos = -1;  // -1 in baseline mode
};

// Flattens an instance into tokens and records mask positions. Markers must
// not collide with ordinary tokens, otherwise positions would be ambiguous.
inline RenderedPrompt render(const PromptInstance& instance, const MarkerMap& markers) {
  instance.validate();
  std::unordered_set<std::string> reserved(markers.soft_markers.begin(), markers.soft_markers.end());
  reserved.insert(markers.pmask_marker);
  reserved.insert(markers.nmask_marker);
  if (reserved.size() != markers.soft_markers.size() + 2) {
    fail_validation("marker map assigns the same token to two slots");
  }

  RenderedPrompt out;
  for (const auto& seg : instance.segments) {
    switch (seg.kind) {
      case SegmentKind::context:
      case SegmentKind::mention:
      case SegmentKind::literal:
        for (const auto& tok : seg.tokens) {
          if (reserved.count(tok)) {
            fail_validation("token \"", tok, "\" collides with a reserved marker");
          }
          out.tokens.push_back(tok);
        }
        break;
      case SegmentKind::soft_slot:
        out.tokens.push_back(markers.soft(seg.soft_index));
        break;
      case SegmentKind::pmask_slot:
        out.pmask_pos = static_cast<int>(out.tokens.size());
        out.tokens.push_back(markers.pmask_marker);
        break;
      case SegmentKind::nmask_slot:
        out.nmask_pos = static_cast<int>(out.tokens.size());
        out.tokens.push_back(markers.nmask_marker);
        break;
    }
  }
  return out;
}

}  // namespace copred
