import { AnnotationFlow, UiSessionState } from "./flow.js";
import { STRINGS } from "./strings.js";

/** Renders the flow state into #app. Presentation convention for the item:
 * preceding context plain, S1 italic, S2 bold. */
export function render(root: HTMLElement, flow: AnnotationFlow): void {
  const s = flow.state;
  root.replaceChildren();
  if (s.error) {
    root.append(el("p", "error", STRINGS.errorPrefix + s.error));
  }
  switch (s.screen) {
    case "login":
      renderLogin(root, flow);
      break;
    case "done":
      root.append(el("p", "done", STRINGS.batchDone));
      break;
    default:
      renderItem(root, s);
      if (s.screen === "dc-step1") renderDcStep1(root, flow);
      if (s.screen === "dc-step2") renderDcStep2(root, flow);
      if (s.screen === "qa") renderQa(root, flow);
  }
  if (s.busy) {
    root.append(el("p", "busy", STRINGS.busy));
  }
}

function renderLogin(root: HTMLElement, flow: AnnotationFlow): void {
  root.append(el("h1", "", STRINGS.appTitle));
  const label = el("label", "", STRINGS.workerIdLabel + " ");
  const input = document.createElement("input");
  input.id = "worker-id";
  label.append(input);
  root.append(label);
  for (const [text, method] of [
    [STRINGS.startDc, "dc"],
    [STRINGS.startQa, "qa"],
  ] as const) {
    const btn = el("button", "", text) as HTMLButtonElement;
    btn.onclick = () => void flow.start(input.value.trim(), method);
    root.append(btn);
  }
}

function renderItem(root: HTMLElement, s: UiSessionState): void {
  if (!s.item) return;
  root.append(el("p", "progress", STRINGS.progress(s.item.position, s.item.total)));
  const passage = el("p", "passage", "");
  if (s.item.context) {
    passage.append(document.createTextNode(s.item.context + " "));
  }
  const s1 = el("em", "s1", s.item.s1);
  const s2 = el("strong", "s2", s.item.s2);
  passage.append(s1, document.createTextNode(" "), s2);
  root.append(passage);
}

function renderDcStep1(root: HTMLElement, flow: AnnotationFlow): void {
  root.append(el("p", "", STRINGS.dcStep1Instruction));
  const input = document.createElement("input");
  input.id = "connective";
  input.placeholder = STRINGS.dcStep1Placeholder;
  const btn = el("button", "", STRINGS.dcStep1Submit) as HTMLButtonElement;
  btn.disabled = flow.state.busy;
  btn.onclick = () => void flow.submitConnective(input.value);
  root.append(input, btn);
}

function renderDcStep2(root: HTMLElement, flow: AnnotationFlow): void {
  root.append(el("p", "", STRINGS.dcStep2Instruction));
  const list = document.createElement("div");
  // the server-provided list, verbatim and in order
  for (const option of flow.state.options) {
    const btn = el("button", "option", option) as HTMLButtonElement;
    btn.disabled = flow.state.busy || flow.state.submitted;
    btn.onclick = () => void flow.chooseOption(option);
    list.append(btn);
  }
  root.append(list);
}

function renderQa(root: HTMLElement, flow: AnnotationFlow): void {
  const s = flow.state;
  root.append(el("p", "", STRINGS.qaSentenceInstruction));
  for (const [text, source] of [
    [STRINGS.qaSentenceFirst, "s1"],
    [STRINGS.qaSentenceSecond, "s2"],
  ] as const) {
    const btn = el("button", s.questionSource === source ? "selected" : "", text);
    (btn as HTMLButtonElement).onclick = () => flow.selectSentence(source);
    root.append(btn);
  }
  root.append(el("p", "", STRINGS.qaPrefixInstruction));
  const select = document.createElement("select");
  select.id = "prefix";
  select.append(new Option("", "", true, s.prefix === null));
  for (const prefix of s.prefixes) {
    select.append(new Option(prefix, prefix, false, s.prefix === prefix));
  }
  select.onchange = () => flow.selectPrefix(select.value);
  root.append(select);
  root.append(el("p", "", STRINGS.qaCompletionInstruction));
  const question = document.createElement("textarea");
  question.id = "question";
  question.value = s.questionText;
  question.oninput = () => flow.setQuestionText(question.value);
  root.append(question);
  root.append(el("p", "", STRINGS.qaAnswerNote));
  root.append(el("blockquote", "answer", flow.answerText()));
  const submit = el("button", "", STRINGS.qaSubmit) as HTMLButtonElement;
  submit.disabled = !flow.qaReady() || s.busy;
  submit.onclick = () => void flow.submitQuestion();
  root.append(submit);
  if (s.submitted) {
    root.append(el("p", "", STRINGS.alreadySubmitted));
  }
}

function el(tag: string, className: string, text: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
