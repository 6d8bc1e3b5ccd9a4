import { setApiBase } from "./api.js";
import { setupRerankView } from "./rerank.js";
import { setupSearchView } from "./search.js";
import { setupSixChoiceView } from "./sixchoice.js";

declare global {
  interface Window {
    STYLEMETRIC_API?: string;
  }
}

setApiBase(window.STYLEMETRIC_API ?? "http://127.0.0.1:8008");

const tabs = {
  search: document.getElementById("view-search")!,
  rerank: document.getElementById("view-rerank")!,
  sixchoice: document.getElementById("view-sixchoice")!,
};

setupSearchView(tabs.search);
const rerankHandle = setupRerankView(tabs.rerank);
setupSixChoiceView(tabs.sixchoice);

function show(name: keyof typeof tabs): void {
  for (const [key, elem] of Object.entries(tabs)) {
    elem.hidden = key !== name;
  }
  for (const button of document.querySelectorAll<HTMLButtonElement>("nav button")) {
    button.classList.toggle("active", button.dataset.tab === name);
  }
}

for (const button of document.querySelectorAll<HTMLButtonElement>("nav button")) {
  button.addEventListener("click", () => {
    const target = button.dataset.tab as keyof typeof tabs;
    if (!tabs[target].hidden) return;
    if (rerankHandle.isDirty() && !window.confirm("Discard unsaved re-ranking?")) {
      return; // unsaved-changes guard
    }
    show(target);
  });
}

window.addEventListener("beforeunload", (ev) => {
  if (rerankHandle.isDirty()) ev.preventDefault();
});

show("search");
