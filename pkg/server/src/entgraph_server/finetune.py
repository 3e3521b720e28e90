"""Fine-tuning the generation model on exported prompt/fill records.

Input is the jsonl file the pipeline's export command writes: one object
per line with "prompt" (containing the fill marker) and "fill". Training
is plain teacher forcing with early stopping on validation loss.
"""

from __future__ import annotations

import json
import logging

import torch

log = logging.getLogger(__name__)


class EmptyDataset(ValueError):
    pass


def load_records(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "prompt" not in rec or "fill" not in rec:
                raise ValueError(
                    f"line {lineno}: record needs 'prompt' and 'fill'")
            records.append(rec)
    if not records:
        raise EmptyDataset(f"no training records in {path}")
    return records


def finetune_generator(data_path, model_path, out_path,
                       learning_rate: float = 1e-3,
                       patience: int = 10,
                       max_epochs: int = 100,
                       val_fraction: float = 0.2,
                       fill_marker: str = "<FILL>",
                       fill_sentinel: str = "<extra_id_0>",
                       device: str = "cpu",
                       seed: int = 0) -> list[float]:
    """Fine-tune the seq2seq generator and save a checkpoint to out_path.

    Returns the per-epoch validation losses. Stops early when the
    validation loss has not improved for `patience` epochs; the best
    checkpoint (not the last) is what gets saved.
    """
    from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

    records = load_records(data_path)
    torch.manual_seed(seed)

    tokenizer = AutoTokenizer.from_pretrained(model_path)
    model = AutoModelForSeq2SeqLM.from_pretrained(model_path).to(device)

    prompts = [r["prompt"].replace(fill_marker, fill_sentinel)
               for r in records]
    targets = [f"{fill_sentinel} {r['fill']}" for r in records]
    enc = tokenizer(prompts, padding=True, return_tensors="pt")
    labels = tokenizer(text_target=targets, padding=True,
                       return_tensors="pt").input_ids
    labels[labels == tokenizer.pad_token_id] = -100

    n = len(records)
    n_val = max(1, int(round(n * val_fraction))) if n > 1 else 0
    perm = torch.randperm(n, generator=torch.Generator().manual_seed(seed))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if len(train_idx) == 0:
        train_idx = perm

    def batch(idx):
        return ({k: v[idx].to(device) for k, v in enc.items()},
                labels[idx].to(device))

    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)
    history = []
    best_loss, best_state, since_best = float("inf"), None, 0
    for epoch in range(max_epochs):
        model.train()
        inputs, y = batch(train_idx)
        optimizer.zero_grad()
        loss = model(**inputs, labels=y).loss
        loss.backward()
        optimizer.step()

        model.eval()
        with torch.no_grad():
            if n_val:
                vin, vy = batch(val_idx)
                val_loss = float(model(**vin, labels=vy).loss)
            else:
                val_loss = float(loss)
        history.append(val_loss)
        log.info("epoch %d: val loss %.4f", epoch, val_loss)
        if val_loss < best_loss:
            best_loss, since_best = val_loss, 0
            best_state = {k: v.detach().clone()
                          for k, v in model.state_dict().items()}
        else:
            since_best += 1
            if since_best >= patience:
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    model.save_pretrained(out_path)
    tokenizer.save_pretrained(out_path)
    return history
