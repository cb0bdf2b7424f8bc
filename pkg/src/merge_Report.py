import glob
import json
import os

from utils.loggers import setup_logger
from utils.settings import SUMMARY_PATH, VERDICT_PATH

logger = setup_logger("MergeReport")


def generate_report(verdict_path: str = VERDICT_PATH, summary_path: str = SUMMARY_PATH):
    """
    Merges the acceptance verdict with every other JSON artifact found next to it
    into one summary document.
    """
    with open(verdict_path, "r", encoding="utf-8") as f:
        verdict = json.load(f)

    folder = os.path.dirname(verdict_path) or "."
    artifacts = {}
    for path in sorted(glob.glob(os.path.join(folder, "*.json"))):
        name = os.path.splitext(os.path.basename(path))[0]
        if os.path.abspath(path) in (os.path.abspath(verdict_path), os.path.abspath(summary_path)):
            continue
        with open(path, "r", encoding="utf-8") as f:
            artifacts[name] = json.load(f)

    criteria = []
    for key, value in verdict.get("scores", {}).items():
        tolerance = verdict.get("tolerances", {}).get(key)
        criteria.append({
            "criterion": key,
            "measured": value,
            "tolerance": tolerance,
            "status": "Fail" if key in verdict.get("weak_areas", []) else "Pass",
        })

    output = {
        "title": "Finite predictor acceptance summary",
        "verdict": verdict.get("verdict", "Fail"),
        "criteria": criteria,
        "suggestions": verdict.get("suggestions", {}),
        "artifacts": artifacts,
    }

    os.makedirs(os.path.dirname(summary_path) or ".", exist_ok=True)
    with open(summary_path, "w", encoding="utf-8") as f:
        json.dump(output, f, ensure_ascii=False, indent=2)

    logger.info(f"Report saved as '{summary_path}'")
    return output
