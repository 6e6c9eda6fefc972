// All annotator-facing copy text lives here so the wording can be edited
// without touching the flow logic. None of these strings may name a
// relation sense; workers only ever see connectives and question prefixes.

export const STRINGS = {
  appTitle: "Relation annotation",
  workerIdLabel: "Worker ID",
  startDc: "Start connective task",
  startQa: "Start question task",
  progress: (pos: number, total: number) => `Item ${pos} of ${total}`,
  dcStep1Instruction:
    "Type the connective that, in your view, best expresses how the two " +
    "sentences are related. Imagine it inserted between them.",
  dcStep1Placeholder: "e.g. however",
  dcStep1Submit: "Continue",
  dcStep2Instruction:
    "Pick the phrase closest in meaning to what you intended:",
  dcStep2Submit: "Submit choice",
  qaSentenceInstruction: "Which sentence do you want to ask about?",
  qaSentenceFirst: "The first sentence",
  qaSentenceSecond: "The second sentence",
  qaPrefixInstruction: "Choose how your question starts:",
  qaCompletionInstruction:
    "Finish the question in your own words (you can edit it freely):",
  qaAnswerNote: "The answer to your question will be the other sentence:",
  qaSubmit: "Submit question",
  alreadySubmitted: "Already submitted for this item.",
  batchDone:
    "All done — this batch is complete. Thank you! You can close this tab.",
  networkRetry: "Network problem — press to retry.",
  busy: "Sending…",
  errorPrefix: "Problem: ",
} as const;
