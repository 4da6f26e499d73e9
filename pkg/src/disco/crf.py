"""Linear-chain CRF: Viterbi decoding, forward partition, and NLL loss.

Scores a tag sequence as sum of emissions plus start/transition/end
parameters. Transition constraints are applied by adding -inf entries,
which both decoding and the partition function respect.
"""

import torch
import torch.nn as nn

from .errors import ContractError

NEG_INF = -1e4


class LinearChainCRF(nn.Module):
    def __init__(self, num_tags, forbidden_transitions=(), forbidden_starts=()):
        super().__init__()
        self.num_tags = num_tags
        self.transitions = nn.Parameter(torch.zeros(num_tags, num_tags))
        self.start_scores = nn.Parameter(torch.zeros(num_tags))
        self.end_scores = nn.Parameter(torch.zeros(num_tags))
        mask = torch.zeros(num_tags, num_tags)
        for src, dst in forbidden_transitions:
            mask[src, dst] = NEG_INF
        self.register_buffer("constraint_mask", mask)
        start_mask = torch.zeros(num_tags)
        for tag in forbidden_starts:
            start_mask[tag] = NEG_INF
        self.register_buffer("start_constraint_mask", start_mask)

    def _trans(self, constrained):
        if constrained:
            return self.transitions + self.constraint_mask
        return self.transitions

    def _start(self, constrained):
        if constrained:
            return self.start_scores + self.start_constraint_mask
        return self.start_scores

    def path_score(self, emissions, tags):
        """Unnormalized score of one tag path."""
        score = self.start_scores[tags[0]] + emissions[0, tags[0]]
        trans = self._trans(False)
        for i in range(1, emissions.shape[0]):
            score = score + trans[tags[i - 1], tags[i]] + emissions[i, tags[i]]
        return score + self.end_scores[tags[-1]]

    def log_partition(self, emissions):
        """log Z via the forward algorithm."""
        alpha = self.start_scores + emissions[0]
        trans = self._trans(False)
        for i in range(1, emissions.shape[0]):
            alpha = torch.logsumexp(alpha.unsqueeze(1) + trans, dim=0) + emissions[i]
        return torch.logsumexp(alpha + self.end_scores, dim=0)

    def nll(self, emissions, tags):
        """Negative log-likelihood of the gold path."""
        if len(tags) != emissions.shape[0]:
            raise ContractError("tag count != emission rows")
        return self.log_partition(emissions) - self.path_score(emissions, tags)

    @torch.no_grad()
    def viterbi(self, emissions, constrained=True):
        """Highest-scoring tag sequence under emissions + transitions."""
        n = emissions.shape[0]
        if n == 0:
            return []
        trans = self._trans(constrained)
        score = self._start(constrained) + emissions[0]
        backptr = []
        for i in range(1, n):
            total = score.unsqueeze(1) + trans
            best, idx = total.max(dim=0)
            score = best + emissions[i]
            backptr.append(idx)
        score = score + self.end_scores
        best_last = int(score.argmax())
        path = [best_last]
        for idx in reversed(backptr):
            path.append(int(idx[path[-1]]))
        path.reverse()
        return path


def decode_labels(emissions, mode, crf=None, constrained=True):
    """Decode a label-index sequence: per-token argmax or Viterbi."""
    emissions = torch.as_tensor(emissions, dtype=torch.float32)
    if emissions.shape[0] == 0:
        return []
    if mode == "linear":
        return emissions.argmax(dim=1).tolist()
    if mode == "crf":
        if crf is None:
            raise ContractError("crf mode requires transition parameters")
        return crf.viterbi(emissions, constrained=constrained)
    raise ContractError("unknown decode mode %r" % mode)


def sequence_loss(emissions, gold, mode, crf=None):
    """Training loss: mean cross-entropy (linear) or CRF NLL."""
    if not torch.is_tensor(emissions):
        emissions = torch.as_tensor(emissions, dtype=torch.float32)
    num_tags = emissions.shape[1]
    if any(g < 0 or g >= num_tags for g in gold):
        raise ContractError("gold label outside tagset")
    if len(gold) != emissions.shape[0]:
        raise ContractError("gold length != emission rows")
    gold_t = torch.as_tensor(gold, dtype=torch.long)
    if mode == "linear":
        return nn.functional.cross_entropy(emissions, gold_t)
    if mode == "crf":
        if crf is None:
            raise ContractError("crf mode requires transition parameters")
        return crf.nll(emissions, gold_t)
    raise ContractError("unknown decode mode %r" % mode)
