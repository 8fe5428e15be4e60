"""CLI: artinv-export --kind ssl --audio-dir clips/ --out feats/

Exit codes: 0 when the job ran (even with per-file failures, which land in
manifest.tsv), 1 when every file failed, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExporterError
from .export import KINDS, export, job_from_dir


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="artinv-export",
        description="Export acoustic features from WAV files to AFM1")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--audio-dir", required=True, help="directory of *.wav files")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--model-dir", default=None,
                        help="local pretrained-model directory (ssl / spk-emb)")
    args = parser.parse_args(argv)
    try:
        job = job_from_dir(args.audio_dir, args.kind, args.out, args.model_dir)
        rows = export(job)
    except ExporterError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    ok = sum(1 for r in rows if r.status == "ok")
    print(f"export[{args.kind}]: {ok}/{len(rows)} files -> {args.out} "
          f"(manifest.tsv records per-file status)")
    return 0 if ok or not rows else 1


if __name__ == "__main__":
    sys.exit(main())
