"""Branch history table, branch target buffer and return address stack."""

from __future__ import annotations

BHT_ENTRIES = 256
BTB_ENTRIES = 64
RAS_DEPTH = 8
LINK_REG = 31


class ReturnStack:
    """Fixed-depth circular stack; pushing onto a full stack overwrites the oldest entry."""

    def __init__(self, depth: int = RAS_DEPTH):
        self.depth = depth
        self._slots = [0] * depth
        self._top = 0
        self.count = 0

    def push(self, addr: int) -> None:
        self._slots[self._top] = addr
        self._top = (self._top + 1) % self.depth
        self.count = min(self.count + 1, self.depth)

    def pop(self) -> int | None:
        if self.count == 0:
            return None
        self._top = (self._top - 1) % self.depth
        self.count -= 1
        return self._slots[self._top]


class BranchPredictor:
    """Per-thread predictor state.

    A conditional branch is predicted taken only when its 2-bit counter says
    taken and the BTB holds a target for it. Returns (``jalr r0, r31``)
    predict through the RAS; every other jump predicts through the BTB.
    """

    def __init__(self) -> None:
        self.bht = bytearray([1] * BHT_ENTRIES)
        self.btb_tags = [-1] * BTB_ENTRIES
        self.btb_targets = [0] * BTB_ENTRIES
        self.ras = ReturnStack()

    @staticmethod
    def _bht_index(pc: int) -> int:
        return (pc >> 2) & (BHT_ENTRIES - 1)

    @staticmethod
    def _btb_slot(pc: int) -> tuple[int, int]:
        return (pc >> 2) & (BTB_ENTRIES - 1), pc >> 8

    def btb_lookup(self, pc: int) -> int | None:
        index, tag = self._btb_slot(pc)
        return self.btb_targets[index] if self.btb_tags[index] == tag else None

    def btb_update(self, pc: int, target: int) -> None:
        index, tag = self._btb_slot(pc)
        self.btb_tags[index] = tag
        self.btb_targets[index] = target

    def predict_branch(self, pc: int) -> int | None:
        """Predicted target of a conditional branch, None for fall-through."""
        if self.bht[self._bht_index(pc)] >= 2:
            return self.btb_lookup(pc)
        return None

    def resolve_branch(self, pc: int, taken: bool, target: int) -> bool:
        """Train on an outcome; returns True on a misprediction."""
        predicted = self.predict_branch(pc)
        index = self._bht_index(pc)
        counter = self.bht[index]
        self.bht[index] = min(counter + 1, 3) if taken else max(counter - 1, 0)
        if taken:
            self.btb_update(pc, target)
            return predicted != target
        return predicted is not None

    def resolve_jump(self, pc: int, target: int, *, is_return: bool) -> bool:
        """Predict and train an unconditional jump; returns True on a misprediction."""
        if is_return:
            return self.ras.pop() != target
        predicted = self.btb_lookup(pc)
        self.btb_update(pc, target)
        return predicted != target
